"""Command-line interface: ``wienerdens <command> [options]``.

Every command prints one JSON summary line on stdout and writes its
artifacts to ``--out``. Exit codes: 0 success, 2 validation error,
3 capacity error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classify import TrainConfig, TrainedClassifier, classify, train
from .density import eval_dm_fallback, eval_dn_fallback, fit_dm, fit_dn, load_estimate, DensityEstimate
from .errors import ValidationError, WienerDensError
from .experiment import THREADS_ENV, ExperimentConfig, default_threads, reproduce
from .funcdata import Grid, min_privacy_sigma, simulate_sample, simulate_wiener, substream
from .oracle import SimModel, squared_error_summary, true_density
from .pathio import fmt17, read_labels, read_paths, write_labels, write_paths
from .projection import estimate_basis, load_basis, save_basis
from .selection import CvGrid, select, select_dn

log = logging.getLogger("wienerdens")

# substream role tags used by the commands
_SAMPLE, _CV_EVAL, _EVAL = 0, 1, 2


def _emit(record: dict) -> None:
    print(json.dumps(record, sort_keys=True, default=_jsonable))


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, Path):
        return str(v)
    raise TypeError(type(v).__name__)


def _config(args) -> ExperimentConfig:
    overrides = dict(
        seed=args.seed,
        settings=[args.setting] if getattr(args, "setting", None) else None,
        n=[args.n] if getattr(args, "n", None) else None,
        weight=getattr(args, "weight", None),
    )
    if args.config:
        return ExperimentConfig.from_ini(args.config, **overrides)
    return ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _sigma(args, cfg: ExperimentConfig) -> float:
    if getattr(args, "sigma", None) is not None:
        return float(args.sigma)
    return cfg.model(cfg.settings[0]).sigma


def cmd_simulate(args) -> dict:
    cfg = _config(args)
    model = cfg.model(cfg.settings[0])
    n = cfg.n[0]
    y, x = simulate_sample(model, n, Grid(cfg.T), substream(cfg.seed, _SAMPLE))
    out = _out(args)
    write_paths(out / "Y.csv", y)
    write_paths(out / "X.csv", x)
    cfg.to_ini(out / "config.ini")
    return {"command": "simulate", "setting": model.setting, "n": n, "T": cfg.T,
            "sigma": model.sigma, "seed": cfg.seed, "paths": out / "Y.csv"}


def _load_sample(path) -> np.ndarray:
    _, y = read_paths(path)
    return y


def _basis_for(args, y, cfg):
    if getattr(args, "basis", None):
        return load_basis(args.basis)
    return estimate_basis(y, args.M or cfg.M)


def cmd_estimate(args) -> dict:
    cfg = _config(args)
    y = _load_sample(args.paths)
    sigma = _sigma(args, cfg)
    basis = _basis_for(args, y, cfg)
    out = _out(args)
    save_basis(basis, out / "basis.npz")
    rec = {"command": "estimate", "method": args.method, "n": y.shape[0], "sigma": sigma}
    if args.method == "dm":
        if args.m is None or args.K is None:
            rep = select(y, basis, CvGrid.practical(args.m_max or cfg.m_max, args.K_max or cfg.K_max),
                         sigma, cfg.weight, rng=substream(cfg.seed, _CV_EVAL),
                         n_eval=cfg.cv_n_eval, policy=cfg.policy, seed=cfg.seed)
            rep.write_csv(out / "cv.csv")
            m, K = rep.chosen
            rec["cv_status"] = rep.status
        else:
            m, K = args.m, args.K
        est = fit_dm(y, basis, m, K, sigma, cfg.weight)
        rec.update(m=m, K=K, weight=cfg.weight, n_coefficients=int(est.coeffs.size))
    else:
        if args.K is None:
            rep = select_dn(y, basis, range(1, cfg.dn_K_max + 1), sigma,
                            rng=substream(cfg.seed, _CV_EVAL), n_eval=cfg.cv_n_eval, seed=cfg.seed)
            rep.write_csv(out / "cv.csv")
            K = rep.chosen[1]
        else:
            K = args.K
        est = fit_dn(y, basis, K, sigma)
        rec.update(K=K, n_coefficients=int(est.coeffs.size))
    est.save(out / "estimate.npz")
    _write_coefficients(out / "coefficients.csv", est)
    rec["estimate"] = out / "estimate.npz"
    return rec


def _write_coefficients(path, est) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "coefficient"])
        for idx, c in zip(est.indices, est.coeffs):
            w.writerow(["-".join(map(str, idx)), fmt17(c)])


def cmd_cv(args) -> dict:
    cfg = _config(args)
    y = _load_sample(args.paths)
    sigma = _sigma(args, cfg)
    basis = _basis_for(args, y, cfg)
    grid = CvGrid.practical(args.m_max or cfg.m_max, args.K_max or cfg.K_max)
    rep = select(y, basis, grid, sigma, cfg.weight, rng=substream(cfg.seed, _CV_EVAL),
                 n_eval=args.n_eval or cfg.cv_n_eval, policy=cfg.policy, seed=cfg.seed)
    out = _out(args)
    rep.write_csv(out / "cv.csv")
    return {"command": "cv", **rep.summary(), "table": out / "cv.csv"}


def cmd_evaluate(args) -> dict:
    cfg = _config(args)
    est = load_estimate(args.estimate)
    grid = Grid(est.T)
    if args.paths:
        ids, v = read_paths(args.paths)
    else:
        v = simulate_wiener(grid, est.sigma, substream(cfg.seed, _EVAL), size=args.n_eval or cfg.n_eval)
        ids = list(range(v.shape[0]))
    if isinstance(est, DensityEstimate):
        val, um, uk = eval_dm_fallback(est, v, cfg.policy)
    else:
        val, uk = eval_dn_fallback(est, v)
        um = uk
    rec = {"command": "evaluate", "n_paths": len(ids)}
    truth = se_truth = None
    if args.setting or args.config:
        model = cfg.model(cfg.settings[0])
        truth, se_truth = true_density(SimModel(model, cfg.oracle_R, cfg.seed), v, est.sigma, grid,
                                       return_se=True)
        med, q1, q3 = squared_error_summary(val, truth)
        rec.update(median_se=med, q1_se=q1, q3_se=q3)
    out = _out(args)
    with open(out / "evaluations.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["v_id", "estimate", "used_m", "used_K"] + (["truth", "truth_se", "se"] if truth is not None else []))
        for i, vid in enumerate(ids):
            row = [vid, fmt17(val[i]), int(um[i]), int(uk[i])]
            if truth is not None:
                row += [fmt17(truth[i]), fmt17(se_truth[i]), fmt17((val[i] - truth[i]) ** 2)]
            w.writerow(row)
    if truth is not None:
        with open(out / "oracle.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["v_id", "truth", "mc_se"])
            for i, vid in enumerate(ids):
                w.writerow([vid, fmt17(truth[i]), fmt17(se_truth[i])])
    rec["table"] = out / "evaluations.csv"
    return rec


def cmd_classify(args) -> dict:
    cfg = _config(args)
    out = _out(args)
    if args.action == "train":
        ids, y = read_paths(args.paths)
        lab_map = read_labels(args.labels)
        missing = [i for i in ids if i not in lab_map]
        if missing:
            raise ValidationError(f"{args.labels}: no label for path id {missing[0]!r}")
        labels = np.array([lab_map[i] for i in ids])
        tc = TrainConfig(M=cfg.M, grid=cfg.cv_grid, weight=cfg.weight, n_eval=cfg.cv_n_eval,
                         seed=cfg.seed, policy=cfg.policy)
        clf = train(y, labels, _sigma(args, cfg), tc)
        clf.save(out / "classifier")
        return {"command": "classify", "action": "train", "pi0": clf.pi0, "pi1": clf.pi1,
                "class0_mK": (clf.est0.m, clf.est0.K), "class1_mK": (clf.est1.m, clf.est1.K),
                "model": out / "classifier"}
    clf = TrainedClassifier.load(args.model)
    ids, y = read_paths(args.paths)
    label, score = classify(clf, y, cfg.policy)
    write_labels(out / "predictions.csv", label, ids)
    rec = {"command": "classify", "action": "predict", "n_paths": len(ids),
           "n_class1": int(label.sum()), "predictions": out / "predictions.csv"}
    if args.labels:
        truth = read_labels(args.labels)
        rec["accuracy"] = float(np.mean([truth[i] == lab for i, lab in zip(ids, label)]))
    return rec


def cmd_privacy(args) -> dict:
    val = min_privacy_sigma(args.alpha, args.beta, args.c)
    return {"command": "privacy", "alpha": args.alpha, "beta": args.beta, "c_x1": args.c,
            "min_sigma": round(val, 4), "min_sigma_exact": val,
            "note": "sigma must be strictly larger than min_sigma"}


def cmd_reproduce(args) -> dict:
    cfg = _config(args)
    if args.B:
        cfg.B = args.B
    if args.n_eval:
        cfg.n_eval = args.n_eval
    out = Path(args.out)
    rows = reproduce(cfg, out, threads=args.threads)
    return {"command": "reproduce", "rows": [
        {"setting": r.setting, "method": r.method, "n": r.n, "median_se_x1e4": 1e4 * r.median}
        for r in rows], "results": out / "results.csv"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wienerdens", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file (sections experiment, basis, cv, model)")
    common.add_argument("--seed", type=int, help="master seed (default 0)")
    common.add_argument("--out", default=".", help="output directory (default: current directory)")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads (default: ${THREADS_ENV} or 1)")
    common.add_argument("--setting", choices=["i", "ii", "iii", "iv", "v", "custom"],
                        help="simulation model (default i)")
    common.add_argument("--weight", choices=["hard", "soft"], help="weight rule (default soft)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="simulate contaminated paths")
    s.add_argument("--n", type=int, help="sample size (default 500)")
    s.set_defaults(func=cmd_simulate)

    def estimation_args(sp):
        sp.add_argument("--paths", required=True, help="path CSV (id,t0,...,t{T-1})")
        sp.add_argument("--sigma", type=float, help="noise scale (default: setting's sigma)")
        sp.add_argument("--basis", help="reuse a saved basis .npz instead of estimating one")
        sp.add_argument("--M", type=int, help="sine functions used for the basis (default 20)")
        sp.add_argument("--m-max", dest="m_max", type=int, help="CV grid m range 1..m_max (default 6)")
        sp.add_argument("--K-max", dest="K_max", type=int, help="CV grid K range 1..K_max (default 10)")

    s = sub.add_parser("estimate", parents=[common], help="fit DM or DN estimator")
    estimation_args(s)
    s.add_argument("--method", choices=["dm", "dn"], default="dm")
    s.add_argument("--m", type=int, help="fixed m (skips CV when given with --K)")
    s.add_argument("--K", type=int, help="fixed K")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("cv", parents=[common], help="cross-validation table over (m, K)")
    estimation_args(s)
    s.add_argument("--n-eval", dest="n_eval", type=int, help="P_V paths for the integral (default 10000)")
    s.set_defaults(func=cmd_cv)

    s = sub.add_parser("evaluate", parents=[common], help="evaluate a fitted estimate, optionally vs the oracle")
    s.add_argument("--estimate", required=True, help="estimate.npz from 'estimate'")
    s.add_argument("--paths", help="path CSV to evaluate at (default: fresh P_V draws)")
    s.add_argument("--n-eval", dest="n_eval", type=int, help="number of fresh P_V paths (default 1000)")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("classify", parents=[common], help="train or apply the two-class classifier")
    s.add_argument("action", choices=["train", "predict"])
    s.add_argument("--paths", required=True)
    s.add_argument("--labels", help="CSV id,label (required for train; gives accuracy for predict)")
    s.add_argument("--model", help="classifier directory (predict)")
    s.add_argument("--sigma", type=float)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("privacy", parents=[common], help="minimal noise scale for (alpha, beta)-privacy")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--c", type=float, default=1.0, help="bound on the L2 norm of X' (default 1)")
    s.set_defaults(func=cmd_privacy)

    s = sub.add_parser("reproduce", parents=[common], help="run the DM vs DN simulation study")
    s.add_argument("--n", type=int, help="sample size (config may list several)")
    s.add_argument("--B", type=int, help="replicates (default 20)")
    s.add_argument("--n-eval", dest="n_eval", type=int, help="evaluation paths per replicate (default 1000)")
    s.set_defaults(func=cmd_reproduce)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is None:
        args.threads = default_threads()
    if args.command == "classify":
        if args.action == "train" and not args.labels:
            parser.error("classify train needs --labels")
        if args.action == "predict" and not args.model:
            parser.error("classify predict needs --model")
    try:
        _emit(args.func(args))
    except WienerDensError as exc:
        print(f"wienerdens: error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
