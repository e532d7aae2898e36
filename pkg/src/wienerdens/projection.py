"""Orthonormal bases of L2[0, 1], Ito projection coefficients and the
data-driven basis built from the eigenvectors of the M-hat matrix."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NumericalError, ValidationError
from .funcdata import Grid

__all__ = [
    "SineBasis",
    "CosineBasis",
    "EstimatedBasis",
    "trapezoid_weights",
    "ito_coefficient",
    "coefficient_matrix",
    "mhat",
    "estimate_basis",
    "save_basis",
    "load_basis",
]

BASIS_FORMAT_VERSION = 1


def trapezoid_weights(T: int) -> np.ndarray:
    w = np.full(T, 1.0 / (T - 1))
    w[[0, -1]] *= 0.5
    return w


@dataclass(frozen=True)
class SineBasis:
    """Fourier sine family ``psi_j(t) = sqrt(2) sin(pi j t)``, j = 1..M."""

    M: int = 20

    def __post_init__(self):
        if self.M < 1:
            raise ValidationError("basis size M must be >= 1")

    @property
    def size(self) -> int:
        return self.M

    def values(self, t) -> np.ndarray:
        j = np.arange(1, self.M + 1)[:, None]
        return math.sqrt(2) * np.sin(np.pi * j * np.asarray(t, dtype=float))

    def derivatives(self, t) -> np.ndarray:
        j = np.arange(1, self.M + 1)[:, None]
        return math.sqrt(2) * np.pi * j * np.cos(np.pi * j * np.asarray(t, dtype=float))

    def eval(self, ell: int, t):
        _check_ell(ell, self.size)
        return math.sqrt(2) * np.sin(np.pi * ell * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class CosineBasis:
    """Cosine family ``1, sqrt(2) cos(pi t), ..., sqrt(2) cos(pi (M-1) t)``.

    Not usable for :func:`mhat` (it does not vanish at the end points), but
    handy as a projection basis whose first element is the constant.
    """

    M: int = 20

    @property
    def size(self) -> int:
        return self.M

    def values(self, t) -> np.ndarray:
        j = np.arange(self.M)[:, None]
        out = math.sqrt(2) * np.cos(np.pi * j * np.asarray(t, dtype=float))
        out[0] = 1.0
        return out

    def eval(self, ell: int, t):
        _check_ell(ell, self.size)
        return self.values(t)[ell - 1]


class EstimatedBasis:
    """Basis ``phi_l = sum_j coeffs[l, j] psi_j`` over the sine family.

    Rows of ``coeffs`` are unit eigenvectors of M-hat sorted by decreasing
    eigenvalue.
    """

    def __init__(self, coeffs, eigenvalues):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] != self.eigenvalues.shape[0]:
            raise ValidationError("coeffs must be (L, M) with one eigenvalue per row")
        self.sine = SineBasis(self.coeffs.shape[1])

    @property
    def M(self) -> int:
        return self.coeffs.shape[1]

    @property
    def size(self) -> int:
        return self.coeffs.shape[0]

    def values(self, t) -> np.ndarray:
        return self.coeffs @ self.sine.values(t)

    def eval(self, ell: int, t):
        _check_ell(ell, self.size)
        return self.coeffs[ell - 1] @ self.sine.values(np.atleast_1d(t))

    def __eq__(self, other):
        return (
            isinstance(other, EstimatedBasis)
            and np.array_equal(self.coeffs, other.coeffs)
            and np.array_equal(self.eigenvalues, other.eigenvalues)
        )

    def __repr__(self):
        return f"EstimatedBasis(M={self.M}, leading eigenvalue={self.eigenvalues[0]:.4g})"

    def save(self, path) -> None:
        save_basis(self, path)


def save_basis(basis, path) -> None:
    np.savez(Path(path), format_version=BASIS_FORMAT_VERSION, **basis_to_arrays(basis))


def load_basis(path):
    with np.load(Path(path)) as f:
        version = int(f["format_version"])
        if version != BASIS_FORMAT_VERSION:
            raise ValidationError(f"{path}: unsupported basis format {version}")
        return basis_from_arrays(f)


def basis_to_arrays(basis) -> dict:
    """Flat array dict for embedding a basis in another ``.npz`` artifact."""
    if isinstance(basis, EstimatedBasis):
        return {"basis_kind": "estimated", "basis_coeffs": basis.coeffs,
                "basis_eigenvalues": basis.eigenvalues}
    if isinstance(basis, SineBasis):
        return {"basis_kind": "sine", "basis_M": basis.M}
    if isinstance(basis, CosineBasis):
        return {"basis_kind": "cosine", "basis_M": basis.M}
    raise ValidationError(f"cannot serialise basis of type {type(basis).__name__}")


def basis_from_arrays(f) -> object:
    kind = str(f["basis_kind"])
    if kind == "estimated":
        return EstimatedBasis(f["basis_coeffs"], f["basis_eigenvalues"])
    if kind == "sine":
        return SineBasis(int(f["basis_M"]))
    if kind == "cosine":
        return CosineBasis(int(f["basis_M"]))
    raise ValidationError(f"unknown basis kind {kind!r}")


def _check_ell(ell, size):
    if not 1 <= ell <= size:
        raise IndexError(f"basis index {ell} outside 1..{size}")


def _left_values(basis, T: int, m: int) -> np.ndarray:
    # basis functions at the left end points t_0..t_{T-2}
    return basis.values(Grid(T).t[:-1])[:m]


def ito_coefficient(path, basis, ell: int) -> float:
    """Left-point Ito sum ``sum_k phi_ell(t_k) (x(t_{k+1}) - x(t_k))``."""
    _check_ell(ell, basis.size)
    x = np.asarray(path, dtype=float)
    return float(_left_values(basis, x.shape[-1], ell)[ell - 1] @ np.diff(x))


def coefficient_matrix(sample, basis, m: int) -> np.ndarray:
    """Ito coefficients of each path on the first ``m`` basis functions, shape ``(n, m)``."""
    if not 1 <= m <= basis.size:
        raise IndexError(f"m={m} outside 1..{basis.size}")
    y = np.atleast_2d(np.asarray(sample, dtype=float))
    return np.diff(y, axis=1) @ _left_values(basis, y.shape[1], m).T


def mhat(sample, sine: SineBasis) -> np.ndarray:
    """Estimate of ``M_{jk} = int int psi_j'(t) E{Y(t)Y(s)} psi_k'(s) ds dt``.

    The inner integrals ``a_{lj} = int psi_j'(t) Y_l(t) dt`` use the trapezoid
    rule on the grid; the result is ``a^T a / n``.
    """
    y = np.atleast_2d(np.asarray(sample, dtype=float))
    if y.shape[0] == 0:
        raise ValidationError("mhat needs a non-empty sample")
    T = y.shape[1]
    t = Grid(T).t
    a = y @ (sine.derivatives(t) * trapezoid_weights(T)).T
    out = a.T @ a / y.shape[0]
    return 0.5 * (out + out.T)


def eigh_sorted(mat: np.ndarray):
    """Eigenpairs of a symmetric matrix, descending, with deterministic signs.

    Returns ``(eigenvalues, vectors)`` where ``vectors[l]`` is the l-th unit
    eigenvector and its first component above 1e-12 in magnitude is positive.
    """
    mat = np.asarray(mat, dtype=float)
    try:
        vals, vecs = np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(mat) if np.all(np.isfinite(mat)) else float("nan")
        raise NumericalError(f"symmetric eigensolver failed (condition number {cond:.3g}): {exc}")
    order = np.argsort(vals, kind="stable")[::-1]
    vals, vecs = vals[order], vecs[:, order].T.copy()
    for v in vecs:
        nz = np.flatnonzero(np.abs(v) > 1e-12)
        if nz.size and v[nz[0]] < 0:
            v *= -1.0
    return vals, vecs


def estimate_basis(sample, M: int = 20) -> EstimatedBasis:
    """Data-driven basis from the eigenvectors of :func:`mhat` over ``M`` sine functions."""
    if M < 1:
        raise ValidationError("M must be >= 1")
    vals, vecs = eigh_sorted(mhat(sample, SineBasis(M)))
    return EstimatedBasis(vecs, vals)
