"""Discretised functional data: grids, Wiener paths, simulation models,
pre-masking and privacy noise calibration.

Paths are plain numpy arrays sampled on a :class:`Grid`; a single path has
shape ``(T,)`` and a sample has shape ``(n, T)``. Every path starts at zero.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import ValidationError

__all__ = [
    "Grid",
    "ModelSpec",
    "PrivacyBudget",
    "SETTINGS",
    "substream",
    "simulate_wiener",
    "simulate_sample",
    "premask",
    "min_privacy_sigma",
    "kappa",
]


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator derived from ``(seed, *keys)``.

    The same key tuple always yields the same stream, and distinct tuples
    yield statistically independent streams, so replicates can be run in
    any order or in parallel.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``t_k = k / (T - 1)`` on [0, 1]."""

    T: int = 101

    def __post_init__(self):
        if int(self.T) != self.T or self.T < 2:
            raise ValidationError(f"grid size T must be an integer >= 2, got {self.T!r}")

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.T)

    @property
    def dt(self) -> float:
        return 1.0 / (self.T - 1)

    def check(self, paths, name: str = "paths") -> np.ndarray:
        """Return ``paths`` as a float array after checking shape and start value."""
        arr = np.asarray(paths, dtype=float)
        if arr.shape[-1] != self.T or arr.ndim not in (1, 2):
            raise ValidationError(
                f"{name}: expected shape (T,) or (n, T) with T={self.T}, got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError(f"{name}: non-finite values")
        if np.any(arr[..., 0] != 0.0):
            raise ValidationError(f"{name}: every path must start at 0")
        return arr


def kappa(t):
    """Transition ``2 e^{10t} / (1 + e^{10t}) - 1``, written as ``tanh(5t)``."""
    return np.tanh(5.0 * np.asarray(t, dtype=float))


def _dkappa(t):
    return 5.0 / np.cosh(5.0 * np.asarray(t, dtype=float)) ** 2


PHI_FAMILIES = ("sine", "cosine_kappa", "sine_kappa")


@dataclass(frozen=True)
class ModelSpec:
    """Signal model ``X(t) = sum_j sqrt(lam_j) Z_j phi_j(t)`` plus noise ``sigma W``.

    ``Z_j`` is the mean of two independent U[-0.1, 0.1] variables (one per
    component and path).
    """

    J: int
    sigma: float
    lam: tuple = field(default=())
    phi_family: str = "sine"
    setting: str = "custom"

    def __post_init__(self):
        if self.J < 1:
            raise ValidationError("J must be >= 1")
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValidationError(f"sigma must be finite and > 0, got {self.sigma!r}")
        lam = tuple(float(v) for v in self.lam) if len(self.lam) else tuple(
            math.exp(-j) for j in range(1, self.J + 1)
        )
        if len(lam) != self.J or any(v < 0 for v in lam):
            raise ValidationError("lam must hold J non-negative variances")
        object.__setattr__(self, "lam", lam)
        if self.phi_family not in PHI_FAMILIES:
            raise ValidationError(f"unknown phi_family {self.phi_family!r}")

    @classmethod
    def from_setting(cls, name: str) -> "ModelSpec":
        key = str(name).lower()
        if key not in SETTINGS:
            raise ValidationError(f"unknown setting {name!r}; choose from {sorted(SETTINGS)}")
        J, sigma, family = SETTINGS[key]
        return cls(J=J, sigma=sigma, phi_family=family, setting=key)

    def phi(self, t) -> np.ndarray:
        """Component functions, shape ``(J, len(t))``."""
        t = np.asarray(t, dtype=float)
        j = np.arange(1, self.J + 1)[:, None]
        if self.phi_family == "sine":
            return math.sqrt(2) * np.sin(np.pi * j * t)
        if self.phi_family == "cosine_kappa":
            return math.sqrt(2) * np.cos(np.pi * j * t) * kappa(t)
        return math.sqrt(2) * np.sin(np.pi * j * t) * kappa(t)

    def dphi(self, t) -> np.ndarray:
        """Analytic derivatives of :meth:`phi`, shape ``(J, len(t))``."""
        t = np.asarray(t, dtype=float)
        j = np.arange(1, self.J + 1)[:, None]
        w = np.pi * j
        r2 = math.sqrt(2)
        if self.phi_family == "sine":
            return r2 * w * np.cos(w * t)
        if self.phi_family == "cosine_kappa":
            return r2 * (-w * np.sin(w * t) * kappa(t) + np.cos(w * t) * _dkappa(t))
        return r2 * (w * np.cos(w * t) * kappa(t) + np.sin(w * t) * _dkappa(t))

    @property
    def z_variance(self) -> float:
        return 0.2 ** 2 / 12 / 2

    def draw_z(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(-0.1, 0.1, size=(n, self.J, 2)).mean(axis=-1)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lam"] = list(self.lam)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(
            J=int(d["J"]),
            sigma=float(d["sigma"]),
            lam=tuple(d.get("lam", ())),
            phi_family=d.get("phi_family", "sine"),
            setting=d.get("setting", "custom"),
        )


# (J, sigma, phi family) for the five built-in simulation settings
SETTINGS = {
    "i": (20, 0.1, "sine"),
    "ii": (40, 0.1, "sine"),
    "iii": (40, 0.075, "sine"),
    "iv": (20, 0.075, "cosine_kappa"),
    "v": (20, 0.075, "sine_kappa"),
}


def simulate_wiener(grid: Grid, sigma: float, rng: np.random.Generator, size=None) -> np.ndarray:
    """Scaled Wiener path(s) ``sigma * W`` on ``grid``.

    Increments are i.i.d. ``N(0, sigma^2 dt)``. Returns shape ``(T,)`` when
    ``size`` is None, else ``(size, T)``.
    """
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma < 0:
        raise ValidationError(f"sigma must be finite and >= 0, got {sigma!r}")
    shape = (grid.T - 1,) if size is None else (int(size), grid.T - 1)
    inc = rng.normal(0.0, sigma * math.sqrt(grid.dt), size=shape)
    out = np.zeros(shape[:-1] + (grid.T,))
    np.cumsum(inc, axis=-1, out=out[..., 1:])
    return out


def simulate_sample(model: ModelSpec, n: int, grid: Grid, rng: np.random.Generator):
    """Draw ``n`` contaminated paths ``Y = X + sigma W``.

    Returns ``(Y, X)``, both of shape ``(n, T)``. ``X`` is only meant for
    oracle computations.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    z = model.draw_z(n, rng)
    coef = z * np.sqrt(np.asarray(model.lam))
    x = coef @ model.phi(grid.t)
    x[:, 0] = 0.0  # phi_j(0) = 0 analytically; remove round-off
    y = x + simulate_wiener(grid, model.sigma, rng, size=n)
    return y, x


def premask(path, grid: Grid, mode: Union[str, Callable] = "subtract") -> np.ndarray:
    """Force a raw path (or sample of paths) to start at zero.

    ``mode="subtract"`` returns ``X - X(0)``; a callable ``w`` with
    ``w(0) = 0`` and ``w(1) = 1`` returns the pointwise product ``X * w``.
    """
    x = np.asarray(path, dtype=float)
    if x.shape[-1] != grid.T:
        raise ValidationError(f"path length {x.shape[-1]} does not match grid T={grid.T}")
    if isinstance(mode, str):
        if mode != "subtract":
            raise ValidationError(f"unknown premask mode {mode!r}")
        return x - x[..., :1]
    w = np.asarray(mode(grid.t), dtype=float)
    if abs(w[0]) > 1e-12 or abs(w[-1] - 1.0) > 1e-12:
        raise ValidationError("weight function must satisfy w(0)=0 and w(1)=1")
    out = x * w
    out[..., 0] = 0.0
    return out


@dataclass(frozen=True)
class PrivacyBudget:
    alpha: float
    beta: float
    c_x1: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.c_x1 > 0):
            raise ValidationError("alpha and c_x1 must be > 0")
        if not (0 < self.beta <= 2):
            raise ValidationError(f"beta must lie in (0, 2], got {self.beta!r}")

    @property
    def min_sigma(self) -> float:
        return 2.0 * self.c_x1 * math.sqrt(2.0 * math.log(2.0 / self.beta)) / self.alpha


def min_privacy_sigma(alpha: float, beta: float, c_x1: float = 1.0) -> float:
    """Infimum of the noise scales giving (alpha, beta)-privacy.

    The guarantee needs ``sigma`` *strictly* larger than the returned value
    ``2 c_x1 sqrt(2 log(2 / beta)) / alpha``, where ``c_x1`` bounds the
    L2 norm of the signal derivative.
    """
    return PrivacyBudget(alpha, beta, c_x1).min_sigma
