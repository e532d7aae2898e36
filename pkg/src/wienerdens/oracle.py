"""Ground-truth Wiener densities for known signal laws.

For a signal law ``P_X`` with differentiable paths the density of
``Y = X + V`` with respect to ``P_V`` is

    f_Y(v) = E_X exp( sigma^-2 int X' dv  -  (2 sigma^2)^-1 int X'^2 dt ),

evaluated here with the same left-point sums and grid as the estimators.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .errors import ValidationError
from .funcdata import Grid, ModelSpec, substream
from .projection import SineBasis, eigh_sorted, trapezoid_weights

__all__ = [
    "PointMass",
    "FiniteMixture",
    "SimModel",
    "true_density",
    "sieve_density",
    "squared_error_summary",
    "population_mhat",
    "population_basis",
]


@dataclass(frozen=True)
class FiniteMixture:
    """Mixture of deterministic signals given through their derivatives.

    ``derivatives`` are callables ``t -> x'(t)`` (vectorised).
    """

    weights: Sequence[float]
    derivatives: Sequence[Callable]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size != len(self.derivatives) or w.size == 0:
            raise ValidationError("need one weight per mixture atom")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValidationError("mixture weights must be positive and sum to 1")

    def atoms(self, t) -> tuple:
        d = np.array([np.broadcast_to(np.asarray(f(t), dtype=float), np.shape(t)) for f in self.derivatives])
        return np.asarray(self.weights, dtype=float), d


def PointMass(derivative: Callable) -> FiniteMixture:
    """Degenerate law ``X = x0`` almost surely, given ``x0'``."""
    return FiniteMixture((1.0,), (derivative,))


@dataclass(frozen=True)
class SimModel:
    """Law of the simulation model, evaluated by Monte Carlo over ``R`` signal draws."""

    model: ModelSpec
    R: int = 100_000
    seed: int = 0

    def draws(self, key: int = 0) -> np.ndarray:
        return self.model.draw_z(self.R, substream(self.seed, 7, key))


def _increments(v, grid: Grid):
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if v.shape[1] != grid.T:
        raise ValidationError(f"paths have {v.shape[1]} points, grid has {grid.T}")
    return np.diff(v, axis=1)


def _mc_mean_exp(z, lin, quad_mat, chunk=10_000):
    """Mean and standard error over draws of ``exp(z.lin_p - z'Q z / 2)``.

    ``z``: (R, J) draws; ``lin``: (npts, J); ``quad_mat``: (J, J).
    """
    R = z.shape[0]
    quad = 0.5 * np.einsum("rj,jk,rk->r", z, quad_mat, z)
    shift = None
    s1 = np.zeros(lin.shape[0])
    s2 = np.zeros(lin.shape[0])
    for lo in range(0, R, chunk):
        e = z[lo:lo + chunk] @ lin.T - quad[lo:lo + chunk, None]
        if shift is None:
            shift = e.max(axis=0)
        w = np.exp(e - shift)
        s1 += w.sum(axis=0)
        s2 += (w * w).sum(axis=0)
    mean = s1 / R
    var = np.maximum(s2 / R - mean**2, 0.0) / max(R - 1, 1)
    scale = np.exp(shift)
    return mean * scale, np.sqrt(var) * scale


def true_density(law, v, sigma: float, grid: Grid | None = None, return_se: bool = False):
    """``f_Y(v)`` for path(s) ``v``.

    Exact (finite sum) for :class:`FiniteMixture`; Monte Carlo for
    :class:`SimModel`, in which case ``return_se=True`` also returns the
    Monte-Carlo standard error per path (zeros for exact laws).
    """
    grid = grid or Grid(np.shape(v)[-1])
    dv = _increments(v, grid)
    t = grid.t[:-1]
    if isinstance(law, SimModel):
        dphi = law.model.dphi(t) * np.sqrt(np.asarray(law.model.lam))[:, None]
        lin = dv @ dphi.T / sigma**2
        quad = dphi @ dphi.T * grid.dt / sigma**2
        val, se = _mc_mean_exp(law.draws(), lin, quad)
    else:
        w, d = law.atoms(t)
        expo = (dv @ d.T - 0.5 * grid.dt * (d * d).sum(axis=1)) / sigma**2
        val = np.exp(logsumexp(expo, b=w, axis=1))
        se = np.zeros_like(val)
    if np.ndim(v) == 1:
        val, se = val[0], se[0]
    return (val, se) if return_se else val


def signal_coefficients(law, basis, m: int, grid: Grid) -> tuple:
    """Projection coefficients ``int x' phi_j dt`` (left-point sums) of the law's atoms.

    Returns ``(weights, beta)`` with ``beta`` of shape ``(atoms, m)``; for
    :class:`SimModel` the atoms are the ``R`` Monte-Carlo draws with equal weight.
    """
    t = grid.t[:-1]
    phi = basis.values(t)[:m]
    if isinstance(law, SimModel):
        dphi = law.model.dphi(t) * np.sqrt(np.asarray(law.model.lam))[:, None]
        beta = law.draws() @ (dphi @ phi.T * grid.dt)
        return np.full(law.R, 1.0 / law.R), beta
    w, d = law.atoms(t)
    return w, d @ phi.T * grid.dt


def sieve_density(law, s, sigma: float, basis, grid: Grid | None = None) -> np.ndarray:
    """``f_Y^[m](s) = E exp(sigma^-2 sum_j b_j s_j - (2 sigma^2)^-1 sum_j b_j^2)``.

    ``b_j`` are the signal's projection coefficients on the first
    ``m = len(s)`` functions of ``basis``; ``s`` may be a batch ``(npts, m)``.
    """
    grid = grid or Grid()
    s_arr = np.atleast_2d(np.asarray(s, dtype=float))
    w, beta = signal_coefficients(law, basis, s_arr.shape[1], grid)
    expo = (s_arr @ beta.T - 0.5 * (beta * beta).sum(axis=1)) / sigma**2
    out = np.exp(logsumexp(expo, b=w, axis=1))
    return out[0] if np.ndim(s) == 1 else out


def squared_error_summary(estimates, truths) -> tuple:
    """Median, first and third quartile of ``(estimate - truth)^2``.

    Quartiles use linear interpolation between order statistics
    (``numpy.quantile`` default).
    """
    est = np.asarray(estimates, dtype=float).ravel()
    tru = np.asarray(truths, dtype=float).ravel()
    if est.shape != tru.shape or est.size == 0:
        raise ValidationError(f"need equal non-empty lengths, got {est.size} and {tru.size}")
    q1, med, q3 = np.quantile((est - tru) ** 2, [0.25, 0.5, 0.75])
    return float(med), float(q1), float(q3)


def population_mhat(model: ModelSpec, M: int = 20, grid: Grid | None = None) -> np.ndarray:
    """The matrix M of the basis construction computed from the known covariance
    ``E{Y(t)Y(s)} = sum_j lam_j Var(Z) phi_j(t) phi_j(s) + sigma^2 min(s, t)``,
    with the same trapezoid rule as :func:`~wienerdens.projection.mhat`."""
    grid = grid or Grid()
    t = grid.t
    phi = model.phi(t) * np.sqrt(np.asarray(model.lam) * model.z_variance)[:, None]
    cov = phi.T @ phi + model.sigma**2 * np.minimum.outer(t, t)
    a = SineBasis(M).derivatives(t) * trapezoid_weights(grid.T)
    out = a @ cov @ a.T
    return 0.5 * (out + out.T)


def population_basis(model: ModelSpec, M: int = 20, grid: Grid | None = None):
    """Eigenvalues and coefficient rows of the population version of the estimated basis."""
    return eigh_sorted(population_mhat(model, M, grid))
