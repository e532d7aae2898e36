"""Cross-validated choice of ``(m, K)`` and the theoretical parameter schedules.

The criterion is

    CV(m, K) = mean_j f(V_j)^2  -  (2/n) sum_i f^{(-i)}(Y_i),

with ``V_j`` drawn from ``P_V``. The leave-one-out values use the exact
downdate ``(n alpha - Psi(Y_i)) / (n - 1)`` of the fitted coefficients, and all
pairs of a grid are read off one fit at the largest ``(m, K)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .density import (
    dm_groups,
    dm_values,
    dn_levels,
    fallback_path,
    first_positive,
    group_sums,
    mean_design,
    weight_values,
)
from .errors import ValidationError
from .funcdata import Grid, simulate_wiener
from .hermite import DEFAULT_INDEX_CAP, enumerate_cube, enumerate_simplex
from .projection import coefficient_matrix

__all__ = [
    "CvGrid",
    "CvRow",
    "CvReport",
    "cv_value",
    "cv_surface",
    "loo_values",
    "choose_pair",
    "select",
    "cv_surface_dn",
    "select_dn",
    "theoretical_params",
    "theoretical_mesh",
]

DEFAULT_N_EVAL = 10_000


@dataclass(frozen=True)
class CvGrid:
    pairs: tuple
    source: str = "practical"

    def __post_init__(self):
        pairs = tuple((int(m), int(K)) for m, K in self.pairs)
        if not pairs:
            raise ValidationError("CV grid is empty")
        if len(set(pairs)) != len(pairs):
            raise ValidationError("CV grid has duplicate pairs")
        if any(m < 1 or K < 0 for m, K in pairs):
            raise ValidationError("CV grid needs m >= 1 and K >= 0")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def practical(cls, m_max: int = 6, K_max: int = 10) -> "CvGrid":
        return cls(tuple((m, K) for m in range(1, m_max + 1) for K in range(1, K_max + 1)),
                   f"practical({m_max},{K_max})")


@dataclass
class CvRow:
    m: int
    K: int
    cv: float
    integral: float
    integral_raw: float
    loo_mean: float
    frac_neg_loo: float
    frac_neg_eval: float
    discarded: bool = False
    local_min: bool = False


@dataclass
class CvReport:
    rows: list
    chosen: tuple
    status: str  # "local_min", "global_min" or "all_discarded"
    n_eval: int
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def row(self, m, K) -> CvRow:
        for r in self.rows:
            if (r.m, r.K) == (m, K):
                return r
        raise KeyError((m, K))

    def write_csv(self, path) -> None:
        names = list(CvRow.__dataclass_fields__)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names + ["chosen"])
            for r in self.rows:
                vals = [_fmt(getattr(r, k)) for k in names]
                w.writerow(vals + [int((r.m, r.K) == tuple(self.chosen))])

    def summary(self) -> dict:
        return {"chosen_m": self.chosen[0], "chosen_K": self.chosen[1], "status": self.status,
                "n_pairs": len(self.rows), "n_discarded": sum(r.discarded for r in self.rows),
                "n_eval": self.n_eval, "seed": self.seed}


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, float):
        return format(v, ".17g")
    return v


def _scaled(sample, basis, m, sigma):
    return coefficient_matrix(sample, basis, m) / sigma


def _row(m, K, f_eval, f_loo, f_eval_fb, f_loo_fb) -> CvRow:
    integral = float(np.mean(f_eval_fb**2))
    loo = float(np.mean(f_loo_fb))
    return CvRow(m, K, integral - 2.0 * loo, integral, float(np.mean(f_eval**2)), loo,
                 float(np.mean(f_loo < 0)), float(np.mean(f_eval < 0)))


def cv_surface(sample, basis, pairs, sigma: float, weight: str, eval_paths,
               policy: str = "joint", cap: int = DEFAULT_INDEX_CAP) -> list:
    """CV rows for every ``(m, K)`` in ``pairs`` from one fit at the largest pair.

    Negative values (leave-one-out or on ``eval_paths``) are replaced through
    the per-point fallback before entering the criterion; the reported
    negative fractions are counted before replacement.
    """
    y = np.atleast_2d(np.asarray(sample, dtype=float))
    n = y.shape[0]
    if n < 2:
        raise ValidationError("cross-validation needs at least two paths")
    pairs = CvGrid(pairs).pairs
    weight_values(weight, 0)
    m_max = max(p[0] for p in pairs)
    K_max = max(p[1] for p in pairs)
    if m_max > basis.size:
        raise ValidationError(f"grid needs m={m_max} basis functions, basis has {basis.size}")
    indices = enumerate_simplex(m_max, K_max, cap=cap)
    eff, deg = dm_groups(indices)
    labels = eff * (K_max + 1) + deg
    n_groups = (m_max + 1) * (K_max + 1)

    x = _scaled(y, basis, m_max, sigma)
    coeffs = mean_design(x, indices)
    coeffs[0] = 1.0
    shape = (-1, m_max + 1, K_max + 1)
    p_eval = group_sums(_scaled(eval_paths, basis, m_max, sigma), indices, coeffs,
                        labels, n_groups).reshape(shape)
    p_loo = group_sums(x, indices, coeffs, labels, n_groups, loo_n=n).reshape(shape)

    rows = []
    for m, K in pairs:
        steps = fallback_path(m, K, policy)
        ev = np.column_stack([dm_values(p_eval, mm, kk, weight) for mm, kk in steps])
        lo = np.column_stack([dm_values(p_loo, mm, kk, weight) for mm, kk in steps])
        ev_fb = ev[np.arange(ev.shape[0]), first_positive(ev)]
        lo_fb = lo[np.arange(lo.shape[0]), first_positive(lo)]
        rows.append(_row(m, K, ev[:, 0], lo[:, 0], ev_fb, lo_fb))
    return rows


def cv_value(sample, basis, m: int, K: int, sigma: float, weight: str, eval_paths,
             policy: str = "joint") -> CvRow:
    """CV criterion at a single pair; ``.cv``, ``.frac_neg_loo``, ``.frac_neg_eval`` on the result."""
    return cv_surface(sample, basis, [(m, K)], sigma, weight, eval_paths, policy)[0]


def loo_values(sample, basis, m: int, K: int, sigma: float, weight: str = "hard") -> np.ndarray:
    """Raw leave-one-out values ``f^{(-i)}(Y_i)`` via the coefficient downdate."""
    y = np.atleast_2d(np.asarray(sample, dtype=float))
    n = y.shape[0]
    if n < 2:
        raise ValidationError("leave-one-out needs at least two paths")
    indices = enumerate_simplex(m, K)
    eff, deg = dm_groups(indices)
    x = _scaled(y, basis, m, sigma)
    coeffs = mean_design(x, indices)
    coeffs[0] = 1.0
    p = group_sums(x, indices, coeffs, eff * (K + 1) + deg, (m + 1) * (K + 1), loo_n=n)
    return dm_values(p.reshape(-1, m + 1, K + 1), m, K, weight)


def _grid_neighbors(rows):
    keys = {(r.m, r.K): r for r in rows}
    return lambda r: [keys[k] for k in ((r.m - 1, r.K), (r.m + 1, r.K), (r.m, r.K - 1), (r.m, r.K + 1))
                      if k in keys]


def choose_pair(rows, neighbors=None, max_neg: float = 0.5) -> tuple:
    """Apply the discard rule and pick the local minimum with the smallest ``m + K``.

    A row is discarded when more than ``max_neg`` of its leave-one-out or
    evaluation values are negative. A kept row is a local minimum when its CV
    is ``<=`` that of every kept neighbour (by default the 4-neighbourhood on
    the (m, K) lattice). Ties on ``m + K`` go to smaller K, then smaller m.

    Returns ``(chosen_pair, status)`` and sets the row flags in place.
    """
    for r in rows:
        r.discarded = r.frac_neg_loo > max_neg or r.frac_neg_eval > max_neg
        r.local_min = False
    kept = [r for r in rows if not r.discarded]
    if not kept:
        return (1, 0), "all_discarded"
    neighbors = neighbors or _grid_neighbors(rows)
    for r in kept:
        r.local_min = all(r.cv <= q.cv for q in neighbors(r) if not q.discarded)
    minima = [r for r in kept if r.local_min]
    if minima:
        best = min(minima, key=lambda r: (r.m + r.K, r.K, r.m))
        return (best.m, best.K), "local_min"
    best = min(kept, key=lambda r: (r.cv, r.m + r.K, r.K, r.m))
    return (best.m, best.K), "global_min"


def _eval_paths(sample, sigma, eval_paths, rng, n_eval):
    if eval_paths is not None:
        return np.atleast_2d(np.asarray(eval_paths, dtype=float))
    if rng is None:
        raise ValidationError("pass either eval_paths or a random generator")
    T = np.shape(sample)[-1]
    return simulate_wiener(Grid(T), sigma, rng, size=n_eval)


def select(sample, basis, grid: CvGrid, sigma: float, weight: str = "soft", rng=None,
           eval_paths=None, n_eval: int = DEFAULT_N_EVAL, policy: str = "joint",
           seed: int | None = None) -> CvReport:
    """Choose ``(m, K)`` for the DM estimator by cross-validation over ``grid``.

    One set of evaluation paths (``eval_paths`` or ``n_eval`` fresh draws
    from ``rng``) is shared by all pairs.
    """
    v = _eval_paths(sample, sigma, eval_paths, rng, n_eval)
    rows = cv_surface(sample, basis, grid.pairs, sigma, weight, v, policy)
    chosen, status = choose_pair(rows)
    return CvReport(rows, chosen, status, v.shape[0], seed)


def cv_surface_dn(sample, basis, K_values, sigma: float, eval_paths,
                  cap: int = DEFAULT_INDEX_CAP) -> list:
    """CV rows for the DN estimator; ``m`` equals ``K`` in every row.

    The fallback uses the largest ``K' <= K`` that gives a positive value.
    """
    y = np.atleast_2d(np.asarray(sample, dtype=float))
    n = y.shape[0]
    if n < 2:
        raise ValidationError("cross-validation needs at least two paths")
    K_values = sorted(set(int(k) for k in K_values))
    K_max = K_values[-1]
    indices = enumerate_cube(K_max, cap=cap)
    labels = dn_levels(indices)
    dim = indices.shape[1]
    if dim > basis.size:
        raise ValidationError(f"DN at K={K_max} needs {dim} basis functions, basis has {basis.size}")
    x = _scaled(y, basis, dim, sigma)
    coeffs = mean_design(x, indices)
    coeffs[0] = 1.0
    c_eval = np.cumsum(group_sums(_scaled(eval_paths, basis, dim, sigma), indices, coeffs,
                                  labels, K_max + 1), axis=1)
    c_loo = np.cumsum(group_sums(x, indices, coeffs, labels, K_max + 1, loo_n=n), axis=1)
    rows = []
    for K in K_values:
        ev = c_eval[:, K::-1]
        lo = c_loo[:, K::-1]
        ev_fb = ev[np.arange(ev.shape[0]), first_positive(ev)]
        lo_fb = lo[np.arange(lo.shape[0]), first_positive(lo)]
        rows.append(_row(K, K, ev[:, 0], lo[:, 0], ev_fb, lo_fb))
    return rows


def select_dn(sample, basis, K_values, sigma: float, rng=None, eval_paths=None,
              n_eval: int = DEFAULT_N_EVAL, seed: int | None = None) -> CvReport:
    """Cross-validated K for the DN estimator (smallest K among local minima)."""
    v = _eval_paths(sample, sigma, eval_paths, rng, n_eval)
    rows = cv_surface_dn(sample, basis, K_values, sigma, v)
    keys = {r.K: r for r in rows}
    chosen, status = choose_pair(rows, lambda r: [keys[k] for k in (r.K - 1, r.K + 1) if k in keys])
    if status == "all_discarded":
        chosen = (0, 0)
    return CvReport(rows, chosen, status, v.shape[0], seed)


def theoretical_params(n: int, gamma: float, c_m: float) -> tuple:
    """Deterministic schedule ``K = floor(gamma log n / log log n)``,
    ``m = floor((c_m log n)^(1/gamma))``; returns ``(m, K)``."""
    if not 0 < gamma < 1:
        raise ValidationError(f"gamma must lie in (0, 1), got {gamma!r}")
    if n < 3:
        raise ValidationError("n must be >= 3 so that log log n > 0")
    ln = math.log(n)
    K = math.floor(gamma * ln / math.log(ln))
    m = math.floor((c_m * ln) ** (1.0 / gamma))
    return m, K


def theoretical_mesh(n: int, gamma0: float) -> CvGrid:
    """Mesh ``{floor(log n)..floor((log n)^(1/gamma0))} x {1..floor(log n / log log n)}``."""
    if not 0 < gamma0 <= 1:
        raise ValidationError(f"gamma0 must lie in (0, 1], got {gamma0!r}")
    if n < 3:
        raise ValidationError("n must be >= 3")
    ln = math.log(n)
    m_lo, m_hi = math.floor(ln), math.floor(ln ** (1.0 / gamma0))
    K_hi = math.floor(ln / math.log(ln))
    if m_lo < 1 or K_hi < 1 or m_hi < m_lo:
        raise ValidationError(f"empty mesh for n={n}: m in [{m_lo}, {m_hi}], K in [1, {K_hi}]")
    return CvGrid(tuple((m, K) for m in range(m_lo, m_hi + 1) for K in range(1, K_hi + 1)),
                  f"theoretical(gamma0={gamma0})")
