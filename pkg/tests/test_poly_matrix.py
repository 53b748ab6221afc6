"""
Test Suite for the Polynomial Matrix Module
Arithmetic, calculus, substitution and serialization of PolyMatrix
"""

import numpy as np
import pytest
from scipy import integrate

from polynomials.poly_matrix import (
    FULL,
    LOWER,
    MAX_DEGREE,
    UPPER,
    PolyMatrix,
    hstack,
    integrate_product,
    vstack,
)
from tests.conftest import random_poly


# =============================================================================
# CONSTRUCTION
# =============================================================================

def test_zero_blocks_are_pruned():
    p = PolyMatrix(2, 2, {(0, 0): np.eye(2), (3, 0): np.zeros((2, 2))})
    assert p.degree == 0
    assert p.vars == ""
    assert set(p.blocks) == {(0, 0)}


def test_invalid_domain_rejected():
    with pytest.raises(ValueError):
        PolyMatrix.identity(1, domain=(1.0, 1.0))


def test_degree_cap_enforced():
    with pytest.raises(ValueError):
        PolyMatrix.monomial(MAX_DEGREE + 1, 0)
    assert PolyMatrix.monomial(MAX_DEGREE, 0).degree == MAX_DEGREE


def test_vars_promoted_from_exponents():
    assert PolyMatrix.monomial(2, 0).vars == "s"
    assert PolyMatrix.monomial(0, 1).vars == "st"


def test_block_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        PolyMatrix(2, 2, {(0, 0): np.ones((3, 2))})


# =============================================================================
# ARITHMETIC
# =============================================================================

def test_product_matches_pointwise_product(rng):
    A = random_poly(rng, 2, 3, 3, "st")
    B = random_poly(rng, 3, 2, 2, "st")
    C = A @ B
    for s, t in [(0.1, 0.9), (0.5, 0.5), (0.8, 0.2)]:
        np.testing.assert_allclose(
            C.evaluate(s, t), A.evaluate(s, t) @ B.evaluate(s, t), rtol=1e-12, atol=1e-12
        )


def test_sum_difference_and_scale(rng):
    A = random_poly(rng, 2, 2, 3)
    B = random_poly(rng, 2, 2, 1)
    np.testing.assert_allclose((A + B - A).evaluate(0.3), B.evaluate(0.3), atol=1e-12)
    np.testing.assert_allclose((2.5 * A).evaluate(0.7), 2.5 * A.evaluate(0.7))
    assert (A - A).is_zero


def test_dimension_and_domain_mismatch():
    with pytest.raises(ValueError):
        PolyMatrix.identity(2) + PolyMatrix.identity(3)
    with pytest.raises(ValueError):
        PolyMatrix.identity(2) + PolyMatrix.identity(2, domain=(0.0, 2.0))
    with pytest.raises(ValueError):
        PolyMatrix.zeros(2, 3) @ PolyMatrix.zeros(2, 3)


def test_product_of_decision_dependent_factors_rejected():
    x = PolyMatrix(1, 1, {(0, 0): np.array([[[0.0, 1.0]]])})
    with pytest.raises(ValueError):
        x @ x
    # One affine factor is fine
    y = PolyMatrix.monomial(1, 0, 2.0) @ x
    assert y.n_terms == 2
    np.testing.assert_allclose(y.materialize(np.array([3.0])).evaluate(0.5), [[3.0]])


def test_transpose_and_swap(rng):
    A = random_poly(rng, 2, 3, 2, "st")
    np.testing.assert_allclose(A.T.evaluate(0.2, 0.6), A.evaluate(0.2, 0.6).T)
    np.testing.assert_allclose(A.swap_vars().evaluate(0.2, 0.6), A.evaluate(0.6, 0.2))


def test_stacking(rng):
    A = random_poly(rng, 1, 2, 2)
    B = random_poly(rng, 2, 2, 1)
    V = vstack([A, B])
    assert V.shape == (3, 2)
    np.testing.assert_allclose(V.evaluate(0.4), np.vstack([A.evaluate(0.4), B.evaluate(0.4)]))
    H = hstack([B, B])
    assert H.shape == (2, 4)


def test_kron_identity():
    p = PolyMatrix.scalar({(0, 0): 2.0, (1, 0): 1.0})
    K = p.kron_identity(3)
    np.testing.assert_allclose(K.evaluate(0.5), 2.5 * np.eye(3))


# =============================================================================
# CALCULUS AND SUBSTITUTION
# =============================================================================

@pytest.mark.parametrize("kind", [LOWER, UPPER, FULL])
def test_integrate_matches_quadrature(kind):
    p = PolyMatrix.scalar({(0, 0): 1.0, (1, 1): 2.0, (0, 2): 1.0})
    s = 0.7
    limits = {LOWER: (0.0, s), UPPER: (s, 1.0), FULL: (0.0, 1.0)}[kind]
    expected, _ = integrate.quad(lambda t: 1.0 + 2.0 * s * t + t * t, *limits)
    assert p.integrate(kind).evaluate(s)[0, 0] == pytest.approx(expected, rel=1e-12)


def test_integrate_requires_theta():
    with pytest.raises(ValueError):
        PolyMatrix.monomial(2, 0).integrate(LOWER)


def test_integrate_s():
    p = PolyMatrix.scalar({(0, 0): 1.0, (2, 0): 3.0})
    assert p.integrate_s().evaluate()[0, 0] == pytest.approx(2.0)


def test_integrate_product_volterra_kernel():
    one = PolyMatrix.scalar({(0, 0): 1.0})
    kernel = integrate_product(one, one, "theta", "s")
    assert kernel.evaluate(0.8, 0.3)[0, 0] == pytest.approx(0.5)


def test_integrate_product_against_quadrature(rng):
    A = random_poly(rng, 1, 1, 2, "st")
    B = random_poly(rng, 1, 1, 2, "st")
    s, theta = 0.75, 0.25
    K = integrate_product(A, B, "theta", "b")
    expected, _ = integrate.quad(
        lambda t: (A.evaluate(s, t) @ B.evaluate(t, theta))[0, 0], theta, 1.0
    )
    assert K.evaluate(s, theta)[0, 0] == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_substitute_theta_to_s():
    p = PolyMatrix.scalar({(1, 1): 1.0})
    q = p.substitute({"theta": (0.0, 1.0, 0.0)})
    assert q.vars == "s"
    assert q.evaluate(0.5)[0, 0] == pytest.approx(0.25)


def test_evaluate_outside_domain_rejected():
    with pytest.raises(ValueError):
        PolyMatrix.monomial(1, 0).evaluate(1.5)


def test_evaluate_grid_matches_pointwise(rng):
    A = random_poly(rng, 2, 2, 4)
    s = np.linspace(0.0, 1.0, 7)
    grid = A.evaluate_grid(s)
    for k, point in enumerate(s):
        np.testing.assert_allclose(grid[k], A.evaluate(point), atol=1e-12)


# =============================================================================
# FITTING, PRUNING AND SERIALIZATION
# =============================================================================

def test_from_callable_recovers_polynomial():
    p = PolyMatrix.from_callable(lambda s: (1.0 - 2.0 * s ** 2)[:, None, None], 1, 1, 3)
    assert p.evaluate(0.3)[0, 0] == pytest.approx(1.0 - 2.0 * 0.09, abs=1e-10)
    assert p.degree <= 3


def test_from_callable_smooth_function():
    p = PolyMatrix.from_callable(lambda s: np.exp(s)[:, None, None], 1, 1, 10)
    assert p.evaluate(0.6)[0, 0] == pytest.approx(np.exp(0.6), rel=1e-8)


def test_prune_drops_tiny_coefficients():
    p = PolyMatrix(1, 1, {(0, 0): [[1.0]], (2, 0): [[1e-15]]})
    assert p.prune().degree == 0


def test_dict_round_trip(rng):
    A = random_poly(rng, 2, 3, 3, "st")
    assert PolyMatrix.from_dict(A.to_dict()) == A


def test_decision_dependent_cannot_be_serialized():
    x = PolyMatrix(1, 1, {(0, 0): np.array([[[0.0, 1.0]]])})
    with pytest.raises(ValueError):
        x.to_dict()
