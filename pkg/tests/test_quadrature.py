import numpy as np
import pytest
from scipy.special import exp1

from tailcheck.quadrature import (
    GAUSS_WEIGHTS,
    KRONROD_WEIGHTS,
    NODES,
    QuadratureEngine,
    QuadratureError,
)


def test_rule_tables():
    gauss_nodes = NODES[GAUSS_WEIGHTS > 0]
    np.testing.assert_allclose(np.sort(gauss_nodes), np.polynomial.legendre.leggauss(10)[0], atol=1e-15)
    # Kronrod extension is exact for polynomials up to degree 31
    for d in range(32):
        exact = 2.0 / (d + 1) if d % 2 == 0 else 0.0
        assert abs(KRONROD_WEIGHTS @ NODES**d - exact) < 1e-14


def test_half_line_exponential():
    val, err = QuadratureEngine().integrate(lambda t: np.exp(-t))
    assert abs(val - 1.0) < 1e-12
    assert err <= 1e-10


def test_exponential_integral_identity():
    val, _ = QuadratureEngine().integrate(lambda t: np.exp(-t / 2) / (1 + t))
    assert abs(val - np.exp(0.5) * exp1(0.5)) < 1e-10


def test_split_points_respected_for_jumps():
    eng = QuadratureEngine().with_splits([0.3, 2.7])
    val, _ = eng.integrate(lambda t: np.exp(-t) * ((t > 0.3) & (t <= 2.7)))
    assert abs(val - (np.exp(-0.3) - np.exp(-2.7))) < 1e-12


def test_vector_valued_cells():
    cells, _ = QuadratureEngine().integrate_cells(lambda t: np.stack([np.ones_like(t), t]), [0.0, 1.0, 3.0])
    np.testing.assert_allclose(cells, [[1.0, 2.0], [0.5, 4.0]], atol=1e-13)


def test_infinite_last_cell():
    cells, _ = QuadratureEngine().integrate_cells(lambda t: np.exp(-t), [0.0, 2.0, np.inf])
    np.testing.assert_allclose(cells, [1 - np.exp(-2), np.exp(-2)], atol=1e-12)


def test_nonconvergence_raises():
    eng = QuadratureEngine(abs_tolerance=1e-14, max_subdivisions=10)
    with pytest.raises(QuadratureError, match="non-convergence"):
        eng.integrate_cells(lambda t: np.abs(t - 0.123456789) ** 0.1, [0.0, 1.0])


def test_bad_edges():
    with pytest.raises(ValueError):
        QuadratureEngine().integrate_cells(np.exp, [1.0, 0.0])
