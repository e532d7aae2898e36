import math

import numpy as np
import pytest
from scipy import integrate

from wienerdens.errors import ValidationError
from wienerdens.funcdata import Grid, ModelSpec, simulate_sample, simulate_wiener, substream
from wienerdens.oracle import population_basis
from wienerdens.projection import (
    EstimatedBasis,
    SineBasis,
    coefficient_matrix,
    eigh_sorted,
    estimate_basis,
    ito_coefficient,
    load_basis,
    mhat,
    trapezoid_weights,
)

GRID = Grid(101)


def test_sine_vanishes_at_ends():
    vals = SineBasis(20).values(np.array([0.0, 1.0]))
    assert np.abs(vals).max() < 1e-14


def test_sine_gram_on_grid():
    v = SineBasis(20).values(GRID.t)
    gram = (v * trapezoid_weights(GRID.T)) @ v.T
    assert np.abs(gram - np.eye(20)).max() < 1e-3


def test_ito_zero_path():
    b = SineBasis(5)
    assert all(ito_coefficient(np.zeros(GRID.T), b, ell) == 0.0 for ell in range(1, 6))


def test_ito_linear_path():
    # int_0^1 sqrt(2) sin(pi t) dt = 2 sqrt(2) / pi
    val = ito_coefficient(GRID.t, SineBasis(3), 1)
    assert abs(val - 2 * math.sqrt(2) / math.pi) < 0.01


def test_ito_linearity():
    b = SineBasis(4)
    u = simulate_wiener(GRID, 1.0, substream(1))
    v = simulate_wiener(GRID, 1.0, substream(2))
    lhs = ito_coefficient(2.0 * u - 0.5 * v, b, 3)
    rhs = 2.0 * ito_coefficient(u, b, 3) - 0.5 * ito_coefficient(v, b, 3)
    assert lhs == pytest.approx(rhs, abs=1e-14)


def test_ito_index_range():
    with pytest.raises(IndexError):
        ito_coefficient(GRID.t, SineBasis(3), 4)
    with pytest.raises(IndexError):
        ito_coefficient(GRID.t, SineBasis(3), 0)


def test_coefficient_matrix_batches_ito():
    b = SineBasis(6)
    y = simulate_wiener(GRID, 0.3, substream(3), size=7)
    mat = coefficient_matrix(y, b, 4)
    assert mat.shape == (7, 4)
    ref = np.array([[ito_coefficient(p, b, k) for k in range(1, 5)] for p in y])
    np.testing.assert_allclose(mat, ref, rtol=0, atol=1e-15)
    assert np.all(coefficient_matrix(np.zeros((1, GRID.T)), b, 4) == 0)


def test_coefficient_variance_pure_noise():
    sigma = 0.7
    y = simulate_wiener(GRID, sigma, substream(4), size=10_000)
    col = coefficient_matrix(y, SineBasis(5), 5)
    for k in range(5):
        var = col[:, k].var(ddof=1)
        se = sigma**2 * math.sqrt(2 / (col.shape[0] - 1))
        assert abs(var - sigma**2) < 3 * se


def test_mhat_zero_sample():
    assert np.all(mhat(np.zeros((3, GRID.T)), SineBasis(4)) == 0)
    with pytest.raises(ValidationError):
        mhat(np.zeros((0, GRID.T)), SineBasis(4))


def test_mhat_deterministic_path_vs_quad():
    M = 6
    path = np.sin(np.pi * GRID.t) / np.pi
    est = mhat(path[None, :], SineBasis(M))
    # independent adaptive quadrature of a_j = int psi_j'(t) sin(pi t)/pi dt
    a = np.array([
        integrate.quad(lambda t, j=j: math.sqrt(2) * math.pi * j * math.cos(math.pi * j * t)
                       * math.sin(math.pi * t) / math.pi, 0, 1, limit=200)[0]
        for j in range(1, M + 1)
    ])
    assert abs(a[0]) < 1e-12
    assert np.abs(est - np.outer(a, a)).max() < 1e-3


def test_mhat_symmetric_psd_permutation():
    y, _ = simulate_sample(ModelSpec.from_setting("i"), 300, GRID, substream(5))
    mat = mhat(y, SineBasis(20))
    assert np.array_equal(mat, mat.T)
    ev = np.linalg.eigvalsh(mat)
    assert ev.min() >= -1e-10 * ev.max()
    perm = substream(6).permutation(300)
    assert np.abs(mhat(y[perm], SineBasis(20)) - mat).max() < 1e-12
    b1 = estimate_basis(y, 20)
    b2 = estimate_basis(y[perm], 20)
    assert np.abs(b1.coeffs - b2.coeffs).max() < 1e-10


def test_sigma_shift_keeps_eigenvectors():
    y, _ = simulate_sample(ModelSpec.from_setting("i"), 300, GRID, substream(7))
    mat = mhat(y, SineBasis(20))
    _, v1 = eigh_sorted(mat)
    _, v2 = eigh_sorted(mat - 0.01 * np.eye(20))
    assert np.abs(v1 - v2).max() < 1e-10


def test_eig_order_diagonal():
    vals, vecs = eigh_sorted(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_array_equal(vals, [3.0, 2.0, 1.0])
    np.testing.assert_array_equal(vecs, np.eye(3)[[0, 2, 1]])


def test_estimated_basis_orthonormal_and_sorted():
    y, _ = simulate_sample(ModelSpec.from_setting("v"), 200, GRID, substream(8))
    b = estimate_basis(y, 20)
    assert np.abs(b.coeffs @ b.coeffs.T - np.eye(20)).max() < 1e-10
    assert np.all(np.diff(b.eigenvalues) <= 0)
    for row in b.coeffs:
        first = row[np.flatnonzero(np.abs(row) > 1e-12)[0]]
        assert first > 0
    # residual requirement for the eigensolver
    mat = mhat(y, SineBasis(20))
    for lam, v in zip(b.eigenvalues, b.coeffs):
        assert np.linalg.norm(mat @ v - lam * v) <= 1e-8 * np.linalg.norm(mat, 2)


def test_estimated_basis_functions_orthonormal_on_grid():
    y, _ = simulate_sample(ModelSpec.from_setting("i"), 200, GRID, substream(9))
    b = estimate_basis(y, 20)
    v = b.values(GRID.t)
    gram = (v * trapezoid_weights(GRID.T)) @ v.T
    assert np.abs(gram - np.eye(20)).max() < 1e-3
    assert b.eval(1, 0.0)[0] == pytest.approx(0.0, abs=1e-14)


def test_leading_direction_alignment():
    model = ModelSpec.from_setting("i")
    y, _ = simulate_sample(model, 2000, GRID, substream(10))
    b = estimate_basis(y, 20)
    _, pop = population_basis(model, 20, GRID)
    assert abs(b.coeffs[0] @ pop[0]) > 0.9


def _min_kernel_identity(T, M=5):
    t = np.linspace(0, 1, T)
    w = trapezoid_weights(T)
    d = SineBasis(M).derivatives(t)
    out = np.empty((M, M))
    for j in range(M):
        g = d[j]
        # int_0^1 min(s, t) g(s) ds = int_0^t s g ds + t int_t^1 g ds
        lower = integrate.cumulative_trapezoid(t * g, t, initial=0)
        tail = integrate.cumulative_trapezoid(g, t, initial=0)
        inner = lower + t * (tail[-1] - tail)
        out[:, j] = (d * inner * w).sum(axis=1)
    return np.abs(out - np.eye(M)).max()


def test_min_kernel_identity():
    assert _min_kernel_identity(101) < 2e-2
    assert _min_kernel_identity(10_000) < 1e-4


def test_basis_roundtrip(tmp_path):
    y, _ = simulate_sample(ModelSpec.from_setting("i"), 50, GRID, substream(12))
    b = estimate_basis(y, 8)
    b.save(tmp_path / "b.npz")
    assert load_basis(tmp_path / "b.npz") == b
    assert isinstance(b, EstimatedBasis) and b.M == 8
