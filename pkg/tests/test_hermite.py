import itertools
import math

import numpy as np
import pytest
import sympy

from wienerdens.errors import CapacityError, ValidationError
from wienerdens.funcdata import substream
from wienerdens.hermite import (
    enumerate_cube,
    enumerate_simplex,
    hermite_eval,
    hermite_table,
    simplex_size,
    tensor_design,
    tensor_eval,
)


def gauss_hermite_64():
    x, w = np.polynomial.hermite_e.hermegauss(64)
    return x, w / math.sqrt(2 * math.pi)


def derivative_definition(k):
    """(-1)^k phi^(k)(x) / (phi(x) sqrt(k!)) as a sympy-expanded polynomial."""
    x = sympy.symbols("x")
    phi = sympy.exp(-x**2 / 2)
    poly = sympy.simplify((-1) ** k * sympy.diff(phi, x, k) / phi)
    return sympy.lambdify(x, sympy.expand(poly) / sympy.sqrt(sympy.factorial(k)), "numpy")


def test_base_cases():
    assert hermite_eval(0, 3.7) == 1.0
    assert hermite_eval(1, -2.5) == -2.5
    assert hermite_eval(2, 0.0) == pytest.approx(-1 / math.sqrt(2), abs=1e-15)


def test_orthonormal_gauss_hermite():
    x, w = gauss_hermite_64()
    h = hermite_table(x, 15)
    gram = (h * w[:, None]).T @ h
    assert np.abs(gram - np.eye(16)).max() < 1e-8


def test_recurrence_matches_derivative_definition():
    x = np.linspace(-5, 5, 201)
    h = hermite_table(x, 10)
    for k in range(11):
        ref = np.broadcast_to(derivative_definition(k)(x), x.shape)
        assert np.abs(h[:, k] - ref).max() < 1e-10


def test_table_shape_and_degree_zero():
    x = np.zeros((4, 3))
    h = hermite_table(x, 5)
    assert h.shape == (4, 3, 6)
    assert np.all(h[..., 0] == 1)


def test_simplex_example():
    got = [tuple(r) for r in enumerate_simplex(2, 2)]
    assert got == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    assert enumerate_simplex(1, 0).tolist() == [[0]]


@pytest.mark.parametrize("m", range(1, 6))
@pytest.mark.parametrize("K", range(0, 7))
def test_simplex_counts(m, K):
    assert len(enumerate_simplex(m, K)) == math.comb(K + m, K) == simplex_size(m, K)


@pytest.mark.parametrize("m", range(1, 5))
@pytest.mark.parametrize("K", range(0, 6))
def test_simplex_brute_force(m, K):
    brute = sorted((t for t in itertools.product(range(K + 1), repeat=m) if sum(t) <= K),
                   key=lambda t: (sum(t), t))
    got = [tuple(r) for r in enumerate_simplex(m, K)]
    assert got == brute
    assert len(set(got)) == len(got)
    assert np.array_equal(enumerate_simplex(m, K), enumerate_simplex(m, K))


def test_simplex_large_count():
    assert len(enumerate_simplex(20, 6)) == 230230 == math.comb(26, 6)


def test_simplex_capacity():
    with pytest.raises(CapacityError, match="230230"):
        enumerate_simplex(20, 6, cap=1000)
    with pytest.raises(ValidationError):
        enumerate_simplex(0, 2)


def test_cube():
    c = enumerate_cube(2)
    assert c.tolist() == [list(t) for t in itertools.product(range(3), repeat=2)]
    assert enumerate_cube(0).tolist() == [[0]]


def test_tensor_eval_examples():
    x = np.array([0.3, -1.2, 2.0])
    assert tensor_eval([0, 0, 0], x) == 1.0
    assert tensor_eval([1, 0, 0], x) == pytest.approx(0.3)
    with pytest.raises(ValidationError):
        tensor_eval([1, 0], x)


def test_tensor_eval_factorises():
    rng = substream(0)
    for _ in range(20):
        idx = rng.integers(0, 6, size=3)
        x = rng.normal(size=3)
        ref = np.prod([hermite_eval(int(k), float(v)) for k, v in zip(idx, x)])
        assert abs(tensor_eval(idx, x) - ref) < 1e-14


def test_tensor_design_matches_tensor_eval():
    rng = substream(1)
    x = rng.normal(size=(7, 3))
    idx = enumerate_simplex(3, 4)
    table = hermite_table(x, 4)
    d = tensor_design(table, idx)
    for p in range(7):
        for a in range(0, len(idx), 5):
            assert d[p, a] == pytest.approx(tensor_eval(idx[a], x[p], table[p]), abs=1e-14)


def test_tensor_orthonormality_monte_carlo():
    x = substream(2).normal(size=(1_000_000, 2))
    idx = enumerate_simplex(2, 3)
    psi = tensor_design(hermite_table(x, 3), idx)
    for a in range(len(idx)):
        for b in range(a, len(idx)):
            prod = psi[:, a] * psi[:, b]
            se = prod.std() / math.sqrt(prod.size)
            assert abs(prod.mean() - (a == b)) <= 3 * se
