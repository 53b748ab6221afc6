"""
Operator Inequality Builders
Block operators of the H2 bound and estimator conditions, shared by the LPI
programs and by certificate re-verification
"""

from typing import Optional

import numpy as np

from polynomials.poly_matrix import PolyMatrix
from operators.pi_operator import PIOperator, block_operator
from pie.system import PIESystem


def trace(M: PolyMatrix) -> PolyMatrix:
    """Trace of a constant (possibly decision-dependent) square matrix as a 1 x 1 expression."""
    if M.rows != M.cols:
        raise ValueError(f"Trace of non-square matrix {M.shape}")
    block = M.blocks.get((0, 0))
    if block is None:
        return PolyMatrix.zeros(1, 1, M.domain)
    return PolyMatrix(1, 1, {(0, 0): np.einsum("iik->k", block)[None, None, :]}, M.domain)


def scalar_identity(gamma: PolyMatrix, k: int) -> PIOperator:
    """gamma * I_k on R^k for a 1 x 1 (possibly decision-dependent) gamma."""
    return PIOperator.matrix(gamma.kron_identity(k))


def lyapunov_operator(sys: PIESystem, P: PIOperator, Z: Optional[PIOperator] = None) -> PIOperator:
    """
    T*PA + A*PT, plus T*ZC2 + C2*Z*T when an estimator variable Z is given.

    Each term is formed once and added to its adjoint so the result is
    exactly self-adjoint.
    """
    half = sys.T.adjoint() @ (P @ sys.A)
    if Z is not None:
        half = half + sys.T.adjoint() @ (Z @ sys.C2)
    return half + half.adjoint()


def gramian_inequality(sys: PIESystem, P: PIOperator) -> PIOperator:
    """A*PT + T*PA + C1*C1, required to be negative."""
    return lyapunov_operator(sys, P) + sys.C1.adjoint() @ sys.C1


def output_block(sys: PIESystem, gamma: PolyMatrix, lyapunov: PIOperator) -> PIOperator:
    """[-gamma I, C1; C1*, lyapunov], required to be negative."""
    return block_operator([
        [-scalar_identity(gamma, sys.nz), sys.C1],
        [sys.C1.adjoint(), lyapunov],
    ])


def injection(sys: PIESystem, P: PIOperator, Z: Optional[PIOperator] = None) -> PIOperator:
    """P B1, plus Z D21 for estimator synthesis."""
    inj = P @ sys.B1
    if Z is not None:
        inj = inj + Z @ sys.D21_operator
    return inj


def input_block(sys: PIESystem, P: PIOperator, W: PolyMatrix, Z: Optional[PIOperator] = None) -> PIOperator:
    """[W, (PB1 + ZD21)*; PB1 + ZD21, P], required to be positive."""
    inj = injection(sys, P, Z)
    return block_operator([
        [PIOperator.matrix(W), inj.adjoint()],
        [inj, P],
    ])


def input_gramian(sys: PIESystem, P: PIOperator) -> PolyMatrix:
    """The finite matrix B1* P B1."""
    return (sys.B1.adjoint() @ (P @ sys.B1)).P
