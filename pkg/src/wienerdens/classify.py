"""Two-class Bayes classifier built from estimated Wiener densities."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .density import DensityEstimate, eval_dm_fallback, fit_dm, load_estimate
from .errors import ValidationError
from .funcdata import substream
from .projection import estimate_basis
from .selection import DEFAULT_N_EVAL, CvGrid, select

__all__ = ["TrainConfig", "TrainedClassifier", "train", "classify", "integrated_squared_difference"]


@dataclass(frozen=True)
class TrainConfig:
    M: int = 20
    grid: CvGrid = field(default_factory=CvGrid.practical)
    weight: str = "soft"
    n_eval: int = DEFAULT_N_EVAL
    seed: int = 0
    priors: tuple | None = None
    policy: str = "joint"


@dataclass(frozen=True, eq=False)
class TrainedClassifier:
    est0: DensityEstimate
    est1: DensityEstimate
    pi0: float
    pi1: float
    sigma: float

    def __post_init__(self):
        if min(self.pi0, self.pi1) < 0 or abs(self.pi0 + self.pi1 - 1.0) > 1e-12:
            raise ValidationError("class priors must be non-negative and sum to 1")

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        self.est0.save(d / "class0.npz")
        self.est1.save(d / "class1.npz")
        np.savez(d / "priors.npz", pi0=self.pi0, pi1=self.pi1, sigma=self.sigma)

    @classmethod
    def load(cls, directory) -> "TrainedClassifier":
        d = Path(directory)
        with np.load(d / "priors.npz") as f:
            pi0, pi1, sigma = float(f["pi0"]), float(f["pi1"]), float(f["sigma"])
        return cls(load_estimate(d / "class0.npz"), load_estimate(d / "class1.npz"), pi0, pi1, sigma)


def _fit_class(paths, sigma, config: TrainConfig) -> DensityEstimate:
    basis = estimate_basis(paths, config.M)
    # same evaluation-path stream for both classes
    report = select(paths, basis, config.grid, sigma, config.weight,
                    rng=substream(config.seed, 101), n_eval=config.n_eval,
                    policy=config.policy, seed=config.seed)
    m, K = report.chosen
    return fit_dm(paths, basis, m, K, sigma, config.weight)


def train(paths, labels, sigma, config: TrainConfig | None = None) -> TrainedClassifier:
    """Fit one density per class (own basis and CV choice) and the class priors.

    ``sigma`` may be a pair of per-class noise scales, but only equal values are
    supported because both densities must share the reference measure.
    """
    config = config or TrainConfig()
    sig = np.atleast_1d(np.asarray(sigma, dtype=float))
    if sig.size > 1 and not np.all(sig == sig[0]):
        raise ValidationError("unequal noise scales across classes are not supported: "
                              "the two densities would be relative to different reference measures")
    sigma = float(sig[0])
    y = np.atleast_2d(np.asarray(paths, dtype=float))
    lab = np.asarray(labels)
    if lab.shape != (y.shape[0],) or not np.isin(lab, (0, 1)).all():
        raise ValidationError("labels must be 0/1, one per path")
    if not (lab == 0).any() or not (lab == 1).any():
        raise ValidationError("training data must contain both classes")
    if config.priors is None:
        pi1 = float(np.mean(lab == 1))
        pi0 = 1.0 - pi1
    else:
        pi0, pi1 = map(float, config.priors)
    est0 = _fit_class(y[lab == 0], sigma, config)
    est1 = _fit_class(y[lab == 1], sigma, config)
    return TrainedClassifier(est0, est1, pi0, pi1, sigma)


def classify(clf: TrainedClassifier, y, policy: str = "joint"):
    """Label 1 iff ``pi1 f1(y) >= pi0 f0(y)``; returns ``(label, score)``.

    ``score = pi1 f1(y) - pi0 f0(y)`` with both densities evaluated with the
    positive fallback. Works on one path or a batch.
    """
    f0 = eval_dm_fallback(clf.est0, y, policy)[0]
    f1 = eval_dm_fallback(clf.est1, y, policy)[0]
    score = clf.pi1 * np.asarray(f1) - clf.pi0 * np.asarray(f0)
    label = (score >= 0).astype(int)
    if np.ndim(y) == 1:
        return int(label), float(score)
    return label, score


def integrated_squared_difference(f_a, f_b, eval_paths) -> float:
    """Monte-Carlo ``int |f_a - f_b|^2 dP_V`` over paths drawn from ``P_V``.

    ``f_a`` and ``f_b`` are callables mapping a batch of paths to values.
    No test decision is attached; choosing a rejection threshold is left to
    the caller.
    """
    v = np.atleast_2d(eval_paths)
    return float(np.mean((np.asarray(f_a(v)) - np.asarray(f_b(v))) ** 2))
