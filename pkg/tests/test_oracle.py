import math

import numpy as np
import pytest

from wienerdens.errors import ValidationError
from wienerdens.funcdata import Grid, ModelSpec, simulate_wiener, substream
from wienerdens.oracle import (
    FiniteMixture,
    PointMass,
    SimModel,
    population_mhat,
    sieve_density,
    squared_error_summary,
    true_density,
)
from wienerdens.projection import CosineBasis, SineBasis, coefficient_matrix, mhat

GRID = Grid(101)


def test_zero_law():
    law = PointMass(lambda t: 0.0 * t)
    v = simulate_wiener(GRID, 1.0, substream(0), size=5)
    assert np.all(true_density(law, v, 1.0) == 1.0)
    assert np.all(sieve_density(law, np.ones((3, 4)), 1.0, SineBasis(4)) == 1.0)


def test_constant_derivative_closed_form():
    law = PointMass(lambda t: np.ones_like(t))
    assert abs(true_density(law, GRID.t, 1.0) - math.exp(0.5)) < 1e-3
    c, s = 0.7, 1.3
    want = math.exp(c / s**2 - c**2 / (2 * s**2))
    assert true_density(PointMass(lambda t: c + 0 * t), GRID.t, s) == pytest.approx(want, rel=1e-12)


def test_full_energy_sieve_constant_derivative():
    law = PointMass(lambda t: np.ones_like(t))
    s = coefficient_matrix(GRID.t[None, :], CosineBasis(1), 1)[0]
    assert abs(sieve_density(law, s, 1.0, CosineBasis(1)) - true_density(law, GRID.t, 1.0)) < 1e-3


def test_full_energy_sieve_sine_atom():
    # x0' = psi_1 lies in the span of the first sine function on the grid
    law = PointMass(lambda t: math.sqrt(2) * np.sin(np.pi * t))
    b = SineBasis(1)
    v = simulate_wiener(GRID, 0.5, substream(1), size=20)
    s = coefficient_matrix(v, b, 1)
    np.testing.assert_allclose(sieve_density(law, s, 0.5, b), true_density(law, v, 0.5), rtol=1e-10)


def test_mixture_weights_validated():
    with pytest.raises(ValidationError):
        FiniteMixture((0.5, 0.6), (np.sin, np.cos))
    with pytest.raises(ValidationError):
        FiniteMixture((1.0,), (np.sin, np.cos))


def test_mixture_is_weighted_sum():
    f1, f2 = (lambda t: np.ones_like(t)), (lambda t: np.cos(3 * t))
    v = simulate_wiener(GRID, 0.8, substream(2), size=7)
    mix = true_density(FiniteMixture((0.3, 0.7), (f1, f2)), v, 0.8)
    ref = 0.3 * true_density(PointMass(f1), v, 0.8) + 0.7 * true_density(PointMass(f2), v, 0.8)
    np.testing.assert_allclose(mix, ref, rtol=1e-12)


def test_density_integrates_to_one():
    law = FiniteMixture((0.5, 0.5), (lambda t: 2 * t, lambda t: -np.ones_like(t)))
    f = true_density(law, simulate_wiener(GRID, 1.0, substream(3), size=10_000), 1.0)
    assert np.all(f > 0)
    assert abs(f.mean() - 1) < 3 * f.std(ddof=1) / math.sqrt(f.size)


def test_simmodel_two_runs_agree():
    model = ModelSpec.from_setting("i")
    v = simulate_wiener(GRID, model.sigma, substream(4), size=10)
    a, sa = true_density(SimModel(model, R=100_000, seed=1), v, model.sigma, return_se=True)
    b, sb = true_density(SimModel(model, R=100_000, seed=2), v, model.sigma, return_se=True)
    assert np.all(a > 0) and np.all(sa > 0)
    assert np.all(np.abs(a - b) < 3 * np.sqrt(sa**2 + sb**2))


def test_simmodel_mean_one():
    model = ModelSpec.from_setting("iv")
    f = true_density(SimModel(model, R=2000), simulate_wiener(GRID, model.sigma, substream(5), size=10_000),
                     model.sigma)
    assert abs(f.mean() - 1) < 3 * f.std(ddof=1) / math.sqrt(f.size)


def test_sieve_tower_property():
    law = PointMass(lambda t: 0.8 * np.cos(2 * t) + 0.4 * t)
    b = SineBasis(10)
    v = simulate_wiener(GRID, 1.0, substream(6), size=10_000)
    s = coefficient_matrix(v, b, 8)
    for m in (2, 5, 8):
        f = sieve_density(law, s[:, :m], 1.0, b)
        assert abs(f.mean() - 1) < 3 * f.std(ddof=1) / math.sqrt(f.size)


def test_sieve_risk_decreases():
    law = PointMass(lambda t: 1.5 * np.cos(np.pi * t) + 0.5)
    b = SineBasis(8)
    v = simulate_wiener(GRID, 1.0, substream(7), size=10_000)
    truth = true_density(law, v, 1.0)
    s = coefficient_matrix(v, b, 8)
    errs = [(sieve_density(law, s[:, :m], 1.0, b) - truth) ** 2 for m in (1, 2, 4, 8)]
    for lo, hi in zip(errs, errs[1:]):
        diff = hi - lo
        assert diff.mean() <= 3 * diff.std(ddof=1) / math.sqrt(diff.size)


def test_simmodel_sieve_mean_one():
    model = ModelSpec.from_setting("i")
    law = SimModel(model, R=2000)
    b = SineBasis(5)
    s = coefficient_matrix(simulate_wiener(GRID, model.sigma, substream(8), size=5000), b, 5)
    f = sieve_density(law, s, model.sigma, b)
    assert abs(f.mean() - 1) < 3 * f.std(ddof=1) / math.sqrt(f.size)


def test_squared_error_summary():
    assert squared_error_summary([1, 2, 3], [1, 2, 3]) == (0.0, 0.0, 0.0)
    est = np.sqrt([1.0, 2.0, 3.0, 4.0])
    assert squared_error_summary(est, np.zeros(4)) == pytest.approx((2.5, 1.75, 3.25))
    base = squared_error_summary(est, np.zeros(4))
    assert squared_error_summary(3 * est, np.zeros(4)) == pytest.approx(tuple(9 * x for x in base))
    with pytest.raises(ValidationError):
        squared_error_summary([1, 2], [1])


def test_population_mhat_matches_large_sample():
    from wienerdens.funcdata import simulate_sample

    model = ModelSpec.from_setting("i")
    y, _ = simulate_sample(model, 20_000, GRID, substream(9))
    emp = mhat(y, SineBasis(6))
    pop = population_mhat(model, 6, GRID)
    assert np.abs(emp - pop).max() < 0.1 * np.abs(pop).max()
