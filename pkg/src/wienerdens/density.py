"""Hermite tensor-series estimators of the Wiener density ``f_Y = dP_Y/dP_V``.

Two estimators share the same machinery:

* DM: indices ``k`` of length ``m`` with ``|k| <= K`` and a weight
  ``omega_K(|k|)`` applied at evaluation time;
* DN: the full cube ``{0..K}^K`` over the first ``K`` basis functions,
  unweighted.

Coefficients are stored unweighted. Because ``H_0 = 1``, a coefficient whose
index has trailing zeros is the same number at every larger ``m``, so the
table fitted at ``(m, K)`` contains the exact tables for every ``m' <= m``,
``K' <= K``. Evaluation therefore works on per-group partial sums: group
``(e, d)`` collects the indices with last non-zero position ``e`` and degree
``d`` (DN uses a single level ``max(e, max entry)``), and the value at any
smaller pair is a weighted sum of these partials.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CapacityError, ValidationError
from .hermite import DEFAULT_INDEX_CAP, enumerate_cube, enumerate_simplex, hermite_table, tensor_design
from .projection import basis_from_arrays, basis_to_arrays, coefficient_matrix

__all__ = [
    "WEIGHT_RULES",
    "weight_values",
    "fallback_path",
    "DensityEstimate",
    "DNEstimate",
    "fit_dm",
    "eval_dm",
    "eval_dm_fallback",
    "fit_dn",
    "eval_dn",
    "eval_dn_fallback",
    "load_estimate",
]

WEIGHT_RULES = ("hard", "soft")
FALLBACK_POLICIES = ("joint", "alternate")
ESTIMATE_FORMAT_VERSION = 1

# max entries of one (points x indices) block of tensor values
_BLOCK = 4_000_000


def weight_values(rule: str, K: int) -> np.ndarray:
    """``omega_K(d)`` for ``d = 0..K``: ones (hard) or ``1 - d/(K+1)`` (soft)."""
    if rule == "hard":
        return np.ones(K + 1)
    if rule == "soft":
        return 1.0 - np.arange(K + 1) / (K + 1)
    raise ValidationError(f"unknown weight rule {rule!r}; use 'hard' or 'soft'")


def fallback_path(m: int, K: int, policy: str = "joint") -> list:
    """Sequence of ``(m, K)`` pairs tried when an estimate is not positive.

    ``joint`` lowers K and m together (m floored at 1); ``alternate`` lowers
    K first, then m, and so on. Both end at ``K = 0``.
    """
    if policy not in FALLBACK_POLICIES:
        raise ValidationError(f"unknown fallback policy {policy!r}")
    path = [(m, K)]
    lower_k = True
    while K > 0:
        if policy == "joint":
            m, K = max(m - 1, 1), K - 1
        elif lower_k or m == 1:
            K -= 1
            lower_k = False
        else:
            m -= 1
            lower_k = True
        path.append((m, K))
    return path


def dm_groups(indices: np.ndarray):
    """Effective length (last non-zero position, 1-based) and degree per index."""
    nz = indices != 0
    m = indices.shape[1]
    eff = np.where(nz.any(axis=1), m - np.argmax(nz[:, ::-1], axis=1), 0)
    return eff, indices.sum(axis=1)


def dn_levels(indices: np.ndarray) -> np.ndarray:
    """Smallest cube size K whose index set ``{0..K}^K`` contains each index."""
    eff, _ = dm_groups(indices)
    return np.maximum(eff, indices.max(axis=1))


def _one_hot(labels: np.ndarray, n_groups: int) -> np.ndarray:
    g = np.zeros((labels.size, n_groups))
    g[np.arange(labels.size), labels] = 1.0
    return g


def group_sums(x, indices, coeffs, labels, n_groups, loo_n=None) -> np.ndarray:
    """Per-group sums of ``coeffs[a] * Psi_a(x_p)`` for every point ``p``.

    ``x`` holds already scaled coordinates, shape ``(npts, m)``. With
    ``loo_n=n`` the leave-one-out version
    ``(n coeffs[a] - Psi_a(x_p)) Psi_a(x_p) / (n - 1)`` is summed instead,
    which assumes ``x_p`` is the p-th fitting point.
    """
    x = np.atleast_2d(x)
    kmax = int(indices.max(initial=0))
    onehot = _one_hot(labels, n_groups)
    out = np.empty((x.shape[0], n_groups))
    step = max(1, _BLOCK // max(1, indices.shape[0]))
    for lo in range(0, x.shape[0], step):
        table = hermite_table(x[lo:lo + step], kmax)
        psi = tensor_design(table, indices)
        if loo_n is None:
            out[lo:lo + step] = (psi * coeffs) @ onehot
        else:
            out[lo:lo + step] = ((loo_n * coeffs - psi) * psi) @ onehot / (loo_n - 1)
    return out


def mean_design(x, indices) -> np.ndarray:
    """Column means of the tensor design matrix (the fitted coefficients)."""
    x = np.atleast_2d(x)
    kmax = int(indices.max(initial=0))
    total = np.zeros(indices.shape[0])
    step = max(1, _BLOCK // max(1, indices.shape[0]))
    for lo in range(0, x.shape[0], step):
        total += tensor_design(hermite_table(x[lo:lo + step], kmax), indices).sum(axis=0)
    return total / x.shape[0]


def dm_values(partials: np.ndarray, m: int, K: int, rule: str) -> np.ndarray:
    """Estimator values at ``(m, K)`` from DM partials of shape ``(npts, m_fit+1, K_fit+1)``."""
    sub = partials[:, : m + 1, : K + 1].sum(axis=1)
    return sub @ weight_values(rule, K)


def first_positive(values: np.ndarray) -> np.ndarray:
    """Column position of the first positive entry in each row (rows must contain one)."""
    pos = values > 0
    if not pos.any(axis=1).all():
        raise ValidationError("fallback path has no positive value")
    return np.argmax(pos, axis=1)


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    """Fitted DM estimator: unweighted coefficients over the ``(m, K)`` simplex."""

    m: int
    K: int
    sigma: float
    weight: str
    basis: object
    indices: np.ndarray
    coeffs: np.ndarray
    n: int
    T: int

    def coefficient(self, idx) -> float:
        idx = tuple(idx)
        hit = np.flatnonzero((self.indices == idx).all(axis=1))
        if hit.size == 0:
            raise KeyError(idx)
        return float(self.coeffs[hit[0]])

    def restrict(self, m: int, K: int, weight: str | None = None) -> "DensityEstimate":
        """Estimate at a smaller ``(m, K)``; identical to refitting at that pair."""
        if not (1 <= m <= self.m and 0 <= K <= self.K):
            raise ValidationError(f"({m}, {K}) is not inside the fitted ({self.m}, {self.K})")
        eff, deg = dm_groups(self.indices)
        keep = (eff <= m) & (deg <= K)
        return DensityEstimate(m, K, self.sigma, weight or self.weight, self.basis,
                               self.indices[keep][:, :m].copy(), self.coeffs[keep].copy(), self.n, self.T)

    def scaled_coordinates(self, paths) -> np.ndarray:
        return coefficient_matrix(paths, self.basis, self.m) / self.sigma

    def partials(self, paths) -> np.ndarray:
        eff, deg = dm_groups(self.indices)
        labels = eff * (self.K + 1) + deg
        sums = group_sums(self.scaled_coordinates(paths), self.indices, self.coeffs,
                          labels, (self.m + 1) * (self.K + 1))
        return sums.reshape(-1, self.m + 1, self.K + 1)

    def save(self, path) -> None:
        np.savez(
            Path(path), format_version=ESTIMATE_FORMAT_VERSION, kind="dm",
            m=self.m, K=self.K, sigma=self.sigma, weight=self.weight, n=self.n, T=self.T,
            indices=self.indices, coeffs=self.coeffs, **basis_to_arrays(self.basis),
        )


@dataclass(frozen=True, eq=False)
class DNEstimate:
    """Fitted DN estimator over the cube ``{0..K}^K``."""

    K: int
    sigma: float
    basis: object
    indices: np.ndarray
    coeffs: np.ndarray
    n: int
    T: int

    @property
    def m(self) -> int:
        return self.indices.shape[1]

    def partials(self, paths) -> np.ndarray:
        x = coefficient_matrix(paths, self.basis, self.m) / self.sigma
        return group_sums(x, self.indices, self.coeffs, dn_levels(self.indices), self.K + 1)

    def save(self, path) -> None:
        np.savez(
            Path(path), format_version=ESTIMATE_FORMAT_VERSION, kind="dn",
            K=self.K, sigma=self.sigma, n=self.n, T=self.T,
            indices=self.indices, coeffs=self.coeffs, **basis_to_arrays(self.basis),
        )


def load_estimate(path):
    with np.load(Path(path)) as f:
        version = int(f["format_version"])
        if version != ESTIMATE_FORMAT_VERSION:
            raise ValidationError(f"{path}: unsupported estimate format {version}")
        basis = basis_from_arrays(f)
        common = dict(sigma=float(f["sigma"]), basis=basis, indices=f["indices"],
                      coeffs=f["coeffs"], n=int(f["n"]), T=int(f["T"]))
        if str(f["kind"]) == "dm":
            return DensityEstimate(m=int(f["m"]), K=int(f["K"]), weight=str(f["weight"]), **common)
        return DNEstimate(K=int(f["K"]), **common)


def _check_fit_args(sample, basis, m, sigma):
    y = np.atleast_2d(np.asarray(sample, dtype=float))
    if y.shape[0] < 1:
        raise ValidationError("sample must contain at least one path")
    if not (np.isfinite(sigma) and sigma > 0):
        raise ValidationError(f"sigma must be > 0, got {sigma!r}")
    if m > basis.size:
        raise ValidationError(f"m={m} exceeds basis size {basis.size}")
    return y


def fit_dm(sample, basis, m: int, K: int, sigma: float, weight: str = "soft",
           cap: int = DEFAULT_INDEX_CAP) -> DensityEstimate:
    """Fit the DM estimator ``alpha_k = mean_j prod_i H_{k_i}(beta'_{Y_j,i} / sigma)``."""
    if m < 1 or K < 0:
        raise ValidationError(f"need m >= 1 and K >= 0, got m={m}, K={K}")
    weight_values(weight, 0)
    y = _check_fit_args(sample, basis, m, sigma)
    indices = enumerate_simplex(m, K, cap=cap)
    x = coefficient_matrix(y, basis, m) / sigma
    coeffs = mean_design(x, indices)
    coeffs[0] = 1.0  # H_0 average; exact by definition
    return DensityEstimate(m, K, float(sigma), weight, basis, indices, coeffs, y.shape[0], y.shape[1])


def _maybe_scalar(u, *arrays):
    single = np.ndim(u) == 1
    out = tuple(a[0] if single else a for a in arrays)
    if single:
        out = tuple(a.item() for a in out)
    return out[0] if len(out) == 1 else out


def _check_paths(est, u):
    u = np.asarray(u, dtype=float)
    if u.ndim not in (1, 2):
        raise ValidationError(f"paths must be 1-d or 2-d, got shape {u.shape}")
    if u.shape[-1] != est.T:
        raise ValidationError(f"paths have {u.shape[-1]} grid points, the estimate was fitted on T={est.T}")
    return np.atleast_2d(u)


def eval_dm(est: DensityEstimate, u):
    """Value of the DM estimate at path(s) ``u``; may be negative."""
    paths = _check_paths(est, u)
    vals = dm_values(est.partials(paths), est.m, est.K, est.weight)
    return _maybe_scalar(u, vals)


def eval_dm_fallback(est: DensityEstimate, u, policy: str = "joint"):
    """Positive DM value at ``u`` using the per-path fallback.

    If the value at ``(m, K)`` is not positive, the pairs from
    :func:`fallback_path` are tried in order and the first positive value is
    returned; ``K = 0`` gives 1, so the search always stops.

    Returns
    -------
    (value, used_m, used_K), scalars for one path and arrays for a batch.
    """
    paths = _check_paths(est, u)
    partials = est.partials(paths)
    steps = fallback_path(est.m, est.K, policy)
    vals = np.column_stack([dm_values(partials, mm, kk, est.weight) for mm, kk in steps])
    pick = first_positive(vals)
    rows = np.arange(vals.shape[0])
    used = np.array(steps)[pick]
    return _maybe_scalar(u, vals[rows, pick], used[:, 0], used[:, 1])


def fit_dn(sample, basis, K: int, sigma: float, cap: int = DEFAULT_INDEX_CAP) -> DNEstimate:
    """Fit the DN estimator on the first ``K`` basis functions, indices ``{0..K}^K``."""
    if K < 0:
        raise ValidationError("K must be >= 0")
    if K > 0 and (K + 1) ** K > cap:
        raise CapacityError(f"DN index set at K={K} has {(K + 1) ** K} indices (cap {cap})")
    y = _check_fit_args(sample, basis, max(K, 1), sigma)
    indices = enumerate_cube(K, cap=cap)
    x = coefficient_matrix(y, basis, indices.shape[1]) / sigma
    coeffs = mean_design(x, indices)
    coeffs[0] = 1.0
    return DNEstimate(K, float(sigma), basis, indices, coeffs, y.shape[0], y.shape[1])


def eval_dn(dn: DNEstimate, u):
    paths = _check_paths(dn, u)
    return _maybe_scalar(u, dn.partials(paths).sum(axis=1))


def eval_dn_fallback(dn: DNEstimate, u):
    """Value at the largest ``K' <= K`` giving a positive estimate; returns ``(value, used_K)``."""
    paths = _check_paths(dn, u)
    cum = np.cumsum(dn.partials(paths), axis=1)[:, ::-1]
    pick = first_positive(cum)
    rows = np.arange(cum.shape[0])
    return _maybe_scalar(u, cum[rows, pick], dn.K - pick)
