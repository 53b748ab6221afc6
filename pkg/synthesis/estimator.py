"""
Estimator Synthesis Module
H2-optimal Luenberger gain synthesis for PIE systems and reconstruction of
the gain L = P^-1 Z from the solved variables
"""

from pathlib import Path
from typing import Optional, Tuple, Union
import logging
import math

import numpy as np
from scipy import linalg

from polynomials.poly_matrix import MAX_DEGREE, PolyMatrix
from operators.inversion import (
    DEFAULT_BASIS_DEGREE,
    DEFAULT_TOLERANCE,
    invert_pi_with_residual,
)
from operators.pi_operator import PIOperator
from operators.rl2 import DEFAULT_QUADRATURE_NODES, RL2Function, gauss_legendre, shifted_legendre
from pie.system import ObserverGain, PIESystem
from lpi.program import LPIProgram
from synthesis.certificates import SynthesisResult
from synthesis.h2_norm import DEFAULT_DEGREE, DEFAULT_EPS, _degree_range, solve_with_escalation
from synthesis.inequalities import input_block, lyapunov_operator, output_block, trace

# Setup logging
logger = logging.getLogger(__name__)


# =============================================================================
# GAIN RECONSTRUCTION
# =============================================================================

def _gain_residual(P: PIOperator, L: ObserverGain, Z: PIOperator, n_nodes: int) -> float:
    """Largest relative error ||P L e_k - Z e_k|| over the unit measurement directions."""
    L_op = L.as_operator()
    nodes, weights = gauss_legendre(P.domain, n_nodes)
    worst = 0.0
    for k in range(Z.dims_in[0]):
        e = np.zeros(Z.dims_in[0])
        e[k] = 1.0
        probe = RL2Function(e, PolyMatrix.zeros(0, 1, P.domain))
        target = Z.apply(probe)
        finite, _, dist = P.apply_on_grid(L_op.apply(probe), n_nodes)
        err = float(np.sum((finite - target.finite) ** 2))
        size = float(target.finite @ target.finite)
        if P.dims_in[1]:
            tv = target.values(nodes)
            err += float(np.einsum("q,qi->", weights, (dist - tv) ** 2))
            size += float(np.einsum("q,qi->", weights, tv ** 2))
        worst = max(worst, math.sqrt(err) / max(math.sqrt(size), 1e-300))
    return worst


def _fit_gain(P_hat: PIOperator, Z: PIOperator, degree: int, n_nodes: int) -> ObserverGain:
    """
    L = P_hat Z sampled on the quadrature grid, with L2 refit by Legendre
    least squares at the given degree.
    """
    ny = Z.dims_in[0]
    m, n = P_hat.dims_out
    nodes, weights = gauss_legendre(P_hat.domain, n_nodes)
    L1 = np.zeros((m, ny))
    samples = np.zeros((nodes.size, n, ny))
    for k in range(ny):
        e = np.zeros(ny)
        e[k] = 1.0
        image = Z.apply(RL2Function(e, PolyMatrix.zeros(0, 1, Z.domain)))
        finite, _, dist = P_hat.apply_on_grid(image, n_nodes)
        L1[:, k] = finite
        samples[:, :, k] = dist
    legendre = [shifted_legendre(i, P_hat.domain) for i in range(degree + 1)]
    V = np.column_stack([p(nodes) for p in legendre]) * np.sqrt(weights)[:, None]
    rhs = samples.reshape(nodes.size, -1) * np.sqrt(weights)[:, None]
    coef, *_ = linalg.lstsq(V, rhs)
    monomial = sum(
        np.outer(np.pad(p.coef, (0, degree + 1 - p.coef.size)), coef[i]) for i, p in enumerate(legendre)
    )
    L2 = PolyMatrix(
        n, ny, {(i, 0): monomial[i].reshape(n, ny) for i in range(degree + 1)}, P_hat.domain, "s"
    )
    return ObserverGain(L1, L2)


def reconstruct_gain_with_residual(
    P: PIOperator,
    Z: PIOperator,
    basis_degree: int = DEFAULT_BASIS_DEGREE,
    tol: float = DEFAULT_TOLERANCE,
    n_nodes: int = DEFAULT_QUADRATURE_NODES,
) -> Tuple[ObserverGain, float]:
    """
    L = P^-1 Z from the solved Lyapunov variable P and Z = [Z1; Z2].

    With P_hat ~ P^-1 carrying blocks (P^, Q^1, Q^2, R^0, R^1, R^2):

        L1    = P^ Z1 + int_a^b Q^1(s) Z2(s) ds
        L2(s) = Q^2(s) Z1 + R^0(s) Z2(s) + int_a^s R^1(s, th) Z2(th) dth
                + int_s^b R^2(s, th) Z2(th) dth

    which is the composition P_hat Z restricted to its P and Q2 slots. When
    the exact composition would exceed the polynomial degree cap, L2 is
    refit from P_hat Z on the quadrature grid.

    Returns:
        Tuple (gain, residual ||P L - Z|| relative over the measurement directions)

    Raises:
        InversionError: If P is not coercive
    """
    inverse = invert_pi_with_residual(P, basis_degree, tol, strict=False)
    try:
        gain = ObserverGain.from_operator(inverse.operator @ Z)
    except ValueError as e:
        logger.warning(f"Exact gain composition failed ({e}); refitting on the quadrature grid")
        gain = _fit_gain(inverse.operator, Z, min(MAX_DEGREE, 2 * basis_degree), n_nodes)
    residual = _gain_residual(P, gain, Z, n_nodes)
    logger.info(f"Reconstructed gain: inversion residual {inverse.residual:.3e}, gain residual {residual:.3e}")
    return gain, max(residual, inverse.residual)


def reconstruct_gain(
    P: PIOperator,
    Z: PIOperator,
    basis_degree: int = DEFAULT_BASIS_DEGREE,
    tol: float = DEFAULT_TOLERANCE,
) -> ObserverGain:
    """
    Observer gain L = P^-1 Z.

    Example:
        >>> L = reconstruct_gain(PIOperator.identity(0, 1).scale(2.0), Z)   # L = Z / 2
    """
    return reconstruct_gain_with_residual(P, Z, basis_degree, tol)[0]


# =============================================================================
# SYNTHESIS
# =============================================================================

def synthesize_estimator(
    sys: PIESystem,
    degree: int = DEFAULT_DEGREE,
    eps: float = DEFAULT_EPS,
    backend=None,
    max_degree: Optional[int] = None,
    gain_degree: Optional[int] = None,
    inversion_degree: int = DEFAULT_BASIS_DEGREE,
    inversion_tol: float = DEFAULT_TOLERANCE,
    export_sdpa: Optional[Union[str, Path]] = None,
) -> SynthesisResult:
    """
    Minimize gamma over P >= eps I, free Z = [Z1; Z2] and W subject to

        [-gamma I, C1; C1*, T*PA + A*PT + T*ZC2 + C2*Z*T] <= -eps I
        [W, (PB1 + ZD21)*; PB1 + ZD21, P]                 >= eps I
        trace(W) <= gamma

    then reconstruct L = P^-1 Z. The error dynamics under L have H2 norm
    at most gamma.

    Args:
        sys: Plant with at least one measurement
        degree: Degree of the positive parameterization of P
        gain_degree: Polynomial degree of Z2 (2 * degree when None)
        inversion_degree, inversion_tol: Settings for inverting P

    Raises:
        ValueError: If the plant has no measurement channel
    """
    if sys.ny < 1:
        raise ValueError("Estimator synthesis requires at least one measurement (ny >= 1)")

    def build(d: int):
        program = LPIProgram(sys.domain, name=f"{sys.name}-estimator")
        P = program.decl_pos_pi_var("P", (sys.m, sys.n), d, eps=eps)
        Z = program.decl_free_pi_var(
            "Z", (sys.ny, 0), (sys.m, sys.n), {"P": 0, "Q2": 2 * d if gain_degree is None else gain_degree}
        )
        gamma = program.decl_scalar("gamma")
        W = program.decl_matrix_var("W", sys.nw, symmetric=True)
        program.constrain_nsd(output_block(sys, gamma, lyapunov_operator(sys, P, Z)), eps)
        program.constrain_psd(input_block(sys, P, W, Z), eps)
        program.constrain_geq(gamma - trace(W))
        program.minimize(gamma)
        return program, (P, Z)

    d, assignment, (P, Z) = solve_with_escalation(
        build, degree, _degree_range(sys, degree, max_degree), backend, f"{sys.name} estimator", export_sdpa
    )
    if not assignment.ok:
        return SynthesisResult(math.inf, None, None, None, math.nan, eps=eps, status=assignment.status,
                               degree=d, solver=assignment.solver, inaccurate=assignment.inaccurate,
                               system=sys.name)

    gamma = assignment.scalar("gamma")
    P_val = assignment.value(P)
    Z_val = assignment.value(Z)
    L, residual = reconstruct_gain_with_residual(P_val, Z_val, inversion_degree, inversion_tol)
    warning = residual > inversion_tol
    if warning:
        logger.warning(f"{sys.name}: gain reconstruction residual {residual:.3e} exceeds {inversion_tol:.1e}")
    logger.info(f"{sys.name}: estimator gamma = {gamma:.6g} at degree {d}")
    return SynthesisResult(
        gamma=gamma,
        P=P_val,
        Z=Z_val,
        L=L,
        inversion_residual=residual,
        W=assignment.matrix("W"),
        eps=eps,
        status=assignment.status,
        degree=d,
        solver=assignment.solver,
        inaccurate=assignment.inaccurate,
        system=sys.name,
        warning=warning,
    )
