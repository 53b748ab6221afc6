"""
Test Suite for Operator Inversion
Exact and fitted inverses of coercive 4-PI operators
"""

import numpy as np
import pytest

from polynomials.poly_matrix import PolyMatrix
from operators.inversion import (
    InversionError,
    coercivity_margin,
    invert_pi,
    invert_pi_with_residual,
)
from operators.pi_operator import PIOperator
from operators.rl2 import RL2Function


def const(value: float) -> PolyMatrix:
    return PolyMatrix.scalar({(0, 0): value})


@pytest.fixture
def volterra_perturbation():
    """I + 0.3 V with (V f)(s) = int_0^s f."""
    return PIOperator.identity(0, 1) + PIOperator.build(R1=const(0.3), dims_in=(0, 1), dims_out=(0, 1))


@pytest.fixture
def coupled_operator():
    """Self-adjoint coercive operator on R x L2."""
    return PIOperator.build(
        P=[[2.0]], Q1=const(0.1), Q2=const(0.1), R0=const(1.0), R1=const(0.2), R2=const(0.2),
        dims_in=(1, 1), dims_out=(1, 1),
    )


def round_trip_error(P: PIOperator, P_hat: PIOperator, f: RL2Function) -> float:
    finite, nodes, dist = P_hat.apply_on_grid(P.apply(f))
    err = np.max(np.abs(dist - f.values(nodes)), initial=0.0)
    return float(max(err, np.max(np.abs(finite - f.finite), initial=0.0)))


# =============================================================================
# EXACT INVERSES
# =============================================================================

def test_multiplier_inverse_is_exact(rng):
    P = PIOperator.multiplier(const(2.0))
    result = invert_pi_with_residual(P)
    assert result.degree == 0
    assert result.residual <= 1e-12
    f = RL2Function.random(rng, 0, 1, degree=3)
    assert round_trip_error(P, result.operator, f) <= 1e-12


def test_matrix_inverse_is_exact():
    M = np.array([[3.0, 1.0], [1.0, 2.0]])
    P_hat = invert_pi(PIOperator.matrix(M))
    np.testing.assert_allclose(P_hat.P_matrix(), np.linalg.inv(M), atol=1e-12)


# =============================================================================
# FITTED INVERSES
# =============================================================================

def test_volterra_perturbation_inverse(volterra_perturbation, rng):
    result = invert_pi_with_residual(volterra_perturbation, basis_degree=8, tol=1e-4)
    assert result.converged
    assert result.residual <= 1e-4
    f = RL2Function.random(rng, 0, 1, degree=4)
    assert round_trip_error(volterra_perturbation, result.operator, f) <= 1e-3


def test_coupled_inverse_is_self_adjoint(coupled_operator, rng):
    result = invert_pi_with_residual(coupled_operator, basis_degree=4, tol=1e-6)
    assert result.residual <= 1e-6
    assert result.operator.is_self_adjoint(tol=1e-8)
    f = RL2Function.random(rng, 1, 1, degree=3)
    assert round_trip_error(coupled_operator, result.operator, f) <= 1e-5


def test_coercivity_margin_positive(coupled_operator):
    assert coercivity_margin(coupled_operator, degree=4) > 0.1


# =============================================================================
# ERROR HANDLING
# =============================================================================

def test_non_square_rejected():
    with pytest.raises(ValueError):
        invert_pi_with_residual(PIOperator.zero((1, 1), (2, 1)))


def test_zero_operator_not_coercive():
    with pytest.raises(InversionError):
        invert_pi_with_residual(PIOperator.zero((0, 1), (0, 1)))


def test_decision_dependent_rejected():
    x = PolyMatrix(1, 1, {(0, 0): np.array([[[1.0, 1.0]]])})
    with pytest.raises(ValueError):
        invert_pi_with_residual(PIOperator.multiplier(x))
