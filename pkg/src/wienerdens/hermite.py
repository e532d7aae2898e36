"""Orthonormal (probabilists') Hermite polynomials, tensor products and
multi-index enumeration.

``H_k(x) = He_k(x) / sqrt(k!)`` so that ``{H_k}`` is orthonormal for the
standard Gaussian weight. Values come from the three-term recurrence

    H_0 = 1,  H_1 = x,  H_{k+1} = (x H_k - sqrt(k) H_{k-1}) / sqrt(k + 1).
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import CapacityError, ValidationError

__all__ = [
    "hermite_eval",
    "hermite_table",
    "simplex_size",
    "enumerate_simplex",
    "enumerate_cube",
    "tensor_eval",
    "tensor_design",
    "DEFAULT_INDEX_CAP",
]

DEFAULT_INDEX_CAP = 10_000_000


def hermite_table(x, K: int) -> np.ndarray:
    """All ``H_0 .. H_K`` at ``x``; result has shape ``x.shape + (K + 1,)``."""
    if K < 0:
        raise ValidationError("degree bound K must be >= 0")
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (K + 1,))
    out[..., 0] = 1.0
    if K >= 1:
        out[..., 1] = x
    for k in range(1, K):
        out[..., k + 1] = (x * out[..., k] - math.sqrt(k) * out[..., k - 1]) / math.sqrt(k + 1)
    return out


def hermite_eval(k: int, x):
    """Normalised Hermite polynomial ``H_k`` at ``x`` (scalar or array)."""
    if k < 0:
        raise ValidationError("k must be >= 0")
    val = hermite_table(x, k)[..., k]
    return float(val) if np.ndim(val) == 0 else val


def simplex_size(m: int, K: int) -> int:
    """Number of multi-indices of length ``m`` with entry sum at most ``K``."""
    return math.comb(K + m, K)


def enumerate_simplex(m: int, K: int, cap: int = DEFAULT_INDEX_CAP) -> np.ndarray:
    """Multi-indices of length ``m`` with degree ``<= K`` in graded-lex order.

    Rows are sorted by ascending degree, then lexicographically; e.g. for
    ``m=2, K=2``: (0,0) (0,1) (1,0) (0,2) (1,1) (2,0).

    Returns
    -------
    idx : ndarray of int, shape (C(K+m, K), m)
    """
    if m < 1 or K < 0:
        raise ValidationError(f"need m >= 1 and K >= 0, got m={m}, K={K}")
    count = simplex_size(m, K)
    if count > cap:
        raise CapacityError(f"simplex m={m}, K={K} has {count} indices (cap {cap})")
    out = np.empty((count, m), dtype=np.int64)
    row = 0
    for d in range(K + 1):
        for comp in _compositions(d, m):
            out[row] = comp
            row += 1
    return out


def _compositions(d: int, m: int):
    # all length-m tuples of non-negative ints summing to d, lexicographic
    if m == 1:
        yield (d,)
        return
    for first in range(d + 1):
        for rest in _compositions(d - first, m - 1):
            yield (first,) + rest


def enumerate_cube(K: int, cap: int = DEFAULT_INDEX_CAP) -> np.ndarray:
    """All of ``{0..K}^K`` in lexicographic order (``K=0`` gives one empty-ish index ``(0,)``)."""
    if K < 0:
        raise ValidationError("K must be >= 0")
    if K == 0:
        return np.zeros((1, 1), dtype=np.int64)
    count = (K + 1) ** K
    if count > cap:
        raise CapacityError(f"cube {{0..{K}}}^{K} has {count} indices (cap {cap})")
    return np.array(list(itertools.product(range(K + 1), repeat=K)), dtype=np.int64)


def tensor_design(table: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Tensor-product values for many points and many multi-indices.

    Parameters
    ----------
    table : (npts, m_tab, K_tab + 1) array from :func:`hermite_table`
    idx : (N, m) integer array, ``m <= m_tab``

    Returns
    -------
    (npts, N) array with entry ``[p, a] = prod_j H_{idx[a, j]}(x_{p, j})``.
    """
    idx = np.asarray(idx)
    npts = table.shape[0]
    out = np.ones((npts, idx.shape[0]))
    for j in range(idx.shape[1]):
        col = idx[:, j]
        if col.any():
            out *= table[:, j, col]
    return out


def tensor_eval(idx, x, table: np.ndarray | None = None) -> float:
    """``prod_j H_{idx_j}(x_j)`` for one multi-index and one point.

    A precomputed ``hermite_table`` of shape ``(m, K+1)`` for ``x`` may be
    passed to avoid re-running the recurrence.
    """
    idx = np.asarray(idx, dtype=np.int64)
    x = np.asarray(x, dtype=float)
    if idx.ndim != 1 or x.shape != idx.shape:
        raise ValidationError(f"index length {idx.shape} does not match point length {x.shape}")
    if table is None:
        table = hermite_table(x, int(idx.max(initial=0)))
    return float(np.prod(table[np.arange(idx.size), idx]))
