"""Simulation-study harness: replicate the density-estimation comparison of
DM and DN against the Monte-Carlo truth and summarise squared errors.

All randomness of replicate ``b`` for setting index ``s`` and sample size
``n`` comes from ``substream(seed, s, n, b, role)``, so results do not
depend on execution order or on the number of worker threads.
"""

from __future__ import annotations

import configparser
import csv
import logging
import os
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .density import eval_dm_fallback, eval_dn_fallback, fit_dm, fit_dn
from .errors import NumericalError, ValidationError, WienerDensError
from .funcdata import Grid, ModelSpec, simulate_sample, simulate_wiener, substream
from .oracle import SimModel, squared_error_summary, true_density
from .pathio import fmt17
from .projection import estimate_basis
from .selection import CvGrid, select, select_dn

log = logging.getLogger(__name__)

__all__ = ["ExperimentConfig", "ResultRow", "run_replicate", "reproduce", "default_threads"]

THREADS_ENV = "WIENERDENS_THREADS"
MIN_SUCCESS = 0.8

# (section, field) layout of the config file
_SECTIONS = {
    "experiment": ("settings", "n", "B", "n_eval", "oracle_R", "seed", "methods", "T", "out"),
    "basis": ("M",),
    "cv": ("m_max", "K_max", "dn_K_max", "cv_n_eval", "weight", "policy"),
    "model": ("J", "sigma", "lam", "phi_family"),
}
_LISTS = {"settings": str, "n": int, "methods": str, "lam": float}


def default_threads() -> int:
    return max(1, int(os.environ.get(THREADS_ENV, "1")))


@dataclass
class ExperimentConfig:
    """Everything needed to rerun a simulation study.

    ``settings`` are built-in model names (``i`` .. ``v``) or ``custom``, in
    which case the ``J``/``sigma``/``lam``/``phi_family`` fields describe the
    model.
    """

    settings: list = field(default_factory=lambda: ["i"])
    n: list = field(default_factory=lambda: [500])
    B: int = 20
    n_eval: int = 1000
    oracle_R: int = 100_000
    seed: int = 0
    methods: list = field(default_factory=lambda: ["DM", "DN"])
    T: int = 101
    out: str = "results"
    M: int = 20
    m_max: int = 6
    K_max: int = 10
    dn_K_max: int = 5
    cv_n_eval: int = 10_000
    weight: str = "soft"
    policy: str = "joint"
    J: int = 20
    sigma: float = 0.1
    lam: list = field(default_factory=list)
    phi_family: str = "sine"

    def __post_init__(self):
        for name in ("B", "n_eval", "oracle_R", "M", "m_max", "K_max", "cv_n_eval", "T"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"config: {name} must be >= 1")
        if not self.settings or not self.n or min(self.n) < 2:
            raise ValidationError("config: need at least one setting and sample sizes n >= 2")
        bad = set(self.methods) - {"DM", "DN"}
        if bad or not self.methods:
            raise ValidationError(f"config: unknown methods {sorted(bad)}")
        if self.weight not in ("hard", "soft"):
            raise ValidationError(f"config: weight must be hard or soft, got {self.weight!r}")

    def model(self, setting: str) -> ModelSpec:
        if setting == "custom":
            return ModelSpec(J=self.J, sigma=self.sigma, lam=tuple(self.lam),
                             phi_family=self.phi_family, setting="custom")
        return ModelSpec.from_setting(setting)

    @property
    def cv_grid(self) -> CvGrid:
        return CvGrid.practical(self.m_max, self.K_max)

    def to_ini(self, path) -> None:
        cp = configparser.ConfigParser()
        cp.optionxform = str  # keys such as B, M, K_max are case-sensitive
        for section, names in _SECTIONS.items():
            cp[section] = {}
            for name in names:
                v = getattr(self, name)
                if name in _LISTS:
                    v = ",".join(fmt17(x) if isinstance(x, float) else str(x) for x in v)
                elif isinstance(v, float):
                    v = fmt17(v)
                cp[section][name] = str(v)
        with open(path, "w") as fh:
            cp.write(fh)

    @classmethod
    def from_ini(cls, path, **overrides) -> "ExperimentConfig":
        cp = configparser.ConfigParser()
        cp.optionxform = str
        if not cp.read(path):
            raise ValidationError(f"{path}: cannot read config file")
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for section in cp.sections():
            if section not in _SECTIONS:
                raise ValidationError(f"{path}: unknown section [{section}]")
            for name, raw in cp[section].items():
                if name not in _SECTIONS[section]:
                    raise ValidationError(f"{path}: [{section}] unknown key {name!r}")
                try:
                    if name in _LISTS:
                        kwargs[name] = [_LISTS[name](x.strip()) for x in raw.split(",") if x.strip()]
                    elif types[name] == "int":
                        kwargs[name] = int(raw)
                    elif types[name] == "float":
                        kwargs[name] = float(raw)
                    else:
                        kwargs[name] = raw
                except ValueError:
                    raise ValidationError(f"{path}: [{section}] {name}: cannot parse {raw!r}") from None
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kwargs)


@dataclass
class ResultRow:
    setting: str
    method: str
    n: int
    median: float
    q1: float
    q3: float
    n_values: int
    n_replicates: int
    n_failed: int
    chosen: str
    seconds: float = 0.0

    def csv_values(self):
        scale = 1e4
        return [self.setting, self.method, self.n, fmt17(scale * self.median), fmt17(scale * self.q1),
                fmt17(scale * self.q3), self.n_values, self.n_replicates, self.n_failed, self.chosen]


RESULT_HEADER = ["setting", "method", "n", "median_se_x1e4", "q1_se_x1e4", "q3_se_x1e4",
                 "n_values", "n_replicates", "n_failed", "chosen_histogram"]
DETAIL_HEADER = ["setting", "n", "replicate", "method", "v_id", "estimate", "truth", "truth_se",
                 "se", "used_m", "used_K", "chosen_m", "chosen_K"]


def _oracle_seed(seed, s_idx, n, b) -> int:
    ss = np.random.SeedSequence(int(seed), spawn_key=(s_idx, n, b, 9))
    return int(ss.generate_state(1)[0])


def run_replicate(config: ExperimentConfig, s_idx: int, n: int, b: int) -> dict:
    """One replicate: simulate, estimate the basis, select, fit, evaluate, score.

    Returns a dict with per-method detail arrays and timings.
    """
    setting = config.settings[s_idx]
    model = config.model(setting)
    grid = Grid(config.T)
    sigma = model.sigma
    y, _ = simulate_sample(model, n, grid, substream(config.seed, s_idx, n, b, 0))
    cv_paths = simulate_wiener(grid, sigma, substream(config.seed, s_idx, n, b, 1), size=config.cv_n_eval)
    v = simulate_wiener(grid, sigma, substream(config.seed, s_idx, n, b, 2), size=config.n_eval)
    truth, truth_se = true_density(SimModel(model, config.oracle_R, _oracle_seed(config.seed, s_idx, n, b)),
                                   v, sigma, grid, return_se=True)

    t0 = time.perf_counter()
    basis = estimate_basis(y, config.M)
    basis_time = time.perf_counter() - t0
    out = {"truth": truth, "truth_se": truth_se, "methods": {}}
    for method in config.methods:
        t0 = time.perf_counter()
        if method == "DM":
            rep = select(y, basis, config.cv_grid, sigma, config.weight, eval_paths=cv_paths,
                         policy=config.policy)
            m, K = rep.chosen
            est = fit_dm(y, basis, m, K, sigma, config.weight)
            elapsed = time.perf_counter() - t0 + basis_time
            val, um, uk = eval_dm_fallback(est, v, config.policy)
        else:
            rep = select_dn(y, basis, range(1, config.dn_K_max + 1), sigma, eval_paths=cv_paths)
            m, K = rep.chosen
            dn = fit_dn(y, basis, K, sigma)
            elapsed = time.perf_counter() - t0 + basis_time
            val, uk = eval_dn_fallback(dn, v)
            um = uk
        out["methods"][method] = {"estimate": val, "used_m": um, "used_K": uk,
                                  "chosen": (m, K), "seconds": elapsed, "status": rep.status}
    return out


def _task(args):
    config, s_idx, n, b = args
    try:
        return run_replicate(config, s_idx, n, b), None
    except (WienerDensError, np.linalg.LinAlgError, FloatingPointError, MemoryError) as exc:
        log.warning("replicate setting=%s n=%d b=%d failed: %s", config.settings[s_idx], n, b, exc)
        return None, f"{type(exc).__name__}: {exc}"


def reproduce(config: ExperimentConfig, out_dir=None, threads: int | None = None) -> list:
    """Run the whole study and write ``results.csv``, ``detail.csv``,
    ``timing.csv`` and ``failures.csv`` into ``out_dir``.

    ``results.csv`` and ``detail.csv`` are byte-identical for identical
    configurations regardless of ``threads``; wall-clock times go to
    ``timing.csv`` only.
    """
    out_dir = Path(out_dir or config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    threads = threads or default_threads()
    tasks = [(config, s, n, b) for s in range(len(config.settings)) for n in config.n
             for b in range(config.B)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_task, tasks))
    else:
        results = [_task(t) for t in tasks]

    rows = []
    with open(out_dir / "detail.csv", "w", newline="") as fh_d, \
            open(out_dir / "failures.csv", "w", newline="") as fh_f:
        det = csv.writer(fh_d, lineterminator="\n")
        det.writerow(DETAIL_HEADER)
        fail = csv.writer(fh_f, lineterminator="\n")
        fail.writerow(["setting", "n", "replicate", "error"])
        for s_idx, setting in enumerate(config.settings):
            for n in config.n:
                block = [(t[3], r) for t, r in zip(tasks, results) if t[1] == s_idx and t[2] == n]
                failed = [(b, err) for b, (res, err) in block if res is None]
                for b, err in failed:
                    fail.writerow([setting, n, b, err])
                ok = [(b, res) for b, (res, err) in block if res is not None]
                if len(ok) < MIN_SUCCESS * config.B:
                    raise NumericalError(f"setting {setting}, n={n}: only {len(ok)}/{config.B} replicates succeeded")
                for method in config.methods:
                    est_all, tru_all, hist, secs = [], [], Counter(), []
                    for b, res in ok:
                        r = res["methods"][method]
                        se = (r["estimate"] - res["truth"]) ** 2
                        for i in range(se.size):
                            det.writerow([setting, n, b, method, i, fmt17(r["estimate"][i]),
                                          fmt17(res["truth"][i]), fmt17(res["truth_se"][i]), fmt17(se[i]),
                                          int(r["used_m"][i]), int(r["used_K"][i]), *r["chosen"]])
                        est_all.append(r["estimate"])
                        tru_all.append(res["truth"])
                        hist[r["chosen"]] += 1
                        secs.append(r["seconds"])
                    med, q1, q3 = squared_error_summary(np.concatenate(est_all), np.concatenate(tru_all))
                    chosen = ";".join(f"{m}x{K}:{c}" for (m, K), c in sorted(hist.items()))
                    rows.append(ResultRow(setting, method, n, med, q1, q3, sum(e.size for e in est_all),
                                          len(ok), len(failed), chosen, float(np.mean(secs))))

    with open(out_dir / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_HEADER)
        for r in rows:
            w.writerow(r.csv_values())
    with open(out_dir / "timing.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["setting", "method", "n", "mean_seconds"])
        for r in rows:
            w.writerow([r.setting, r.method, r.n, f"{r.seconds:.3f}"])
    config.to_ini(out_dir / "config.ini")
    return rows
