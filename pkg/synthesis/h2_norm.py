"""
H2 Norm Module
Upper bounds on the H2 norm of PIE systems from LPI programs, plus dense
references for finite-dimensional systems
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Tuple, Union
import logging
import math

import numpy as np
from scipy import linalg

from pie.system import PIESystem, auxiliary_system
from lpi.program import Assignment, LPIProgram
from lpi.sdp import write_sdpa
from lpi.status import INFEASIBLE
from simulation.galerkin import project
from simulation.integrator import output_energy, simulate
from synthesis.certificates import NormCertificate
from synthesis.inequalities import (
    gramian_inequality,
    input_block,
    input_gramian,
    lyapunov_operator,
    output_block,
    trace,
)

# Setup logging
logger = logging.getLogger(__name__)

DEFAULT_EPS = 1e-4
DEFAULT_DEGREE = 2


# =============================================================================
# DEGREE ESCALATION
# =============================================================================

def solve_with_escalation(
    build: Callable[[int], Tuple[LPIProgram, object]],
    degree: int,
    max_degree: Optional[int],
    backend=None,
    label: str = "lpi",
    export_sdpa: Optional[Union[str, Path]] = None,
) -> Tuple[int, Assignment, object]:
    """
    Solve build(d) for d = degree, degree + 1, ... while infeasible.

    Args:
        build: Maps a degree to (program, handles)
        degree: First degree tried
        max_degree: Last degree tried (degree when None)
        backend: Solver backend passed to LPIProgram.solve
        label: Name used in log messages
        export_sdpa: Write each compiled instance to this path before solving

    Returns:
        Tuple (degree used, assignment, handles). An infeasible assignment is
        returned, not raised, when max_degree is reached.

    Raises:
        UnboundedError, NumericalSolverError: On other solver failures
    """
    last = degree if max_degree is None else max(degree, max_degree)
    for d in range(degree, last + 1):
        program, handles = build(d)
        if export_sdpa is not None:
            write_sdpa(program.compile(), export_sdpa, comment=f"{label}, degree {d}")
        assignment = program.solve(backend)
        if assignment.inaccurate:
            logger.warning(f"{label}: solver {assignment.solver} reported an inexact solution")
        if assignment.status == INFEASIBLE:
            if d < last:
                logger.warning(f"{label}: infeasible at degree {d}, escalating to {d + 1}")
                continue
            logger.warning(f"{label}: infeasible up to degree {d}")
            return d, assignment, handles
        assignment.raise_for_status(label)
        return d, assignment, handles
    raise ValueError(f"Empty degree range [{degree}, {last}]")


def _degree_range(sys: PIESystem, degree: int, max_degree: Optional[int]) -> Optional[int]:
    # Degree has no effect on finite-dimensional systems
    return degree if sys.n == 0 else max_degree


# =============================================================================
# LPI BOUNDS
# =============================================================================

def h2_bound_gramian(
    sys: PIESystem,
    degree: int = DEFAULT_DEGREE,
    eps: float = DEFAULT_EPS,
    backend=None,
    max_degree: Optional[int] = None,
    export_sdpa: Optional[Union[str, Path]] = None,
) -> NormCertificate:
    """
    Minimize gamma^2 subject to

        trace(B1* P B1) <= gamma^2
        A*PT + T*PA + C1*C1 <= -eps I
        P >= eps I

    Returns:
        NormCertificate with gamma = sqrt(gamma^2); status 'infeasible' and
        gamma = inf when no certificate exists up to max_degree
    """
    def build(d: int):
        program = LPIProgram(sys.domain, name=f"{sys.name}-gramian")
        P = program.decl_pos_pi_var("P", (sys.m, sys.n), d, eps=eps)
        gamma_sq = program.decl_scalar("gamma_sq")
        gramian = input_gramian(sys, P)
        program.constrain_geq(gamma_sq - trace(gramian))
        program.constrain_nsd(gramian_inequality(sys, P), eps)
        program.minimize(gamma_sq)
        return program, (P, gramian)

    d, assignment, (P, gramian) = solve_with_escalation(
        build, degree, _degree_range(sys, degree, max_degree), backend, f"{sys.name} gramian bound", export_sdpa
    )
    if not assignment.ok:
        return NormCertificate(math.inf, None, None, eps, assignment.status, d, "gramian",
                               assignment.solver, assignment.inaccurate, sys.name)
    gamma = math.sqrt(max(assignment.scalar("gamma_sq"), 0.0))
    W = np.atleast_2d(assignment.value(gramian)) if sys.nw else np.zeros((0, 0))
    logger.info(f"{sys.name}: gramian H2 bound gamma = {gamma:.6g} at degree {d}")
    return NormCertificate(
        gamma, assignment.value(P), W, eps, assignment.status, d, "gramian",
        assignment.solver, assignment.inaccurate, sys.name,
    )


def h2_bound_schur(
    sys: PIESystem,
    degree: int = DEFAULT_DEGREE,
    eps: float = DEFAULT_EPS,
    backend=None,
    max_degree: Optional[int] = None,
    export_sdpa: Optional[Union[str, Path]] = None,
) -> NormCertificate:
    """
    Minimize gamma subject to

        [-gamma I, C1; C1*, T*PA + A*PT] <= -eps I
        [W, B1*P; P B1, P]               >= eps I
        trace(W) <= gamma

    gamma bounds the norm itself, not its square.
    """
    def build(d: int):
        program = LPIProgram(sys.domain, name=f"{sys.name}-schur")
        P = program.decl_pos_pi_var("P", (sys.m, sys.n), d, eps=eps)
        gamma = program.decl_scalar("gamma")
        W = program.decl_matrix_var("W", sys.nw, symmetric=True)
        program.constrain_nsd(output_block(sys, gamma, lyapunov_operator(sys, P)), eps)
        program.constrain_psd(input_block(sys, P, W), eps)
        program.constrain_geq(gamma - trace(W))
        program.minimize(gamma)
        return program, P

    d, assignment, P = solve_with_escalation(
        build, degree, _degree_range(sys, degree, max_degree), backend, f"{sys.name} schur bound", export_sdpa
    )
    if not assignment.ok:
        return NormCertificate(math.inf, None, None, eps, assignment.status, d, "schur",
                               assignment.solver, assignment.inaccurate, sys.name)
    gamma = assignment.scalar("gamma")
    logger.info(f"{sys.name}: schur H2 bound gamma = {gamma:.6g} at degree {d}")
    return NormCertificate(
        gamma, assignment.value(P), assignment.matrix("W"), eps, assignment.status, d, "schur",
        assignment.solver, assignment.inaccurate, sys.name,
    )


# =============================================================================
# DENSE REFERENCES
# =============================================================================

@dataclass(frozen=True)
class DenseH2:
    """H2 quantities of a finite-dimensional system."""

    trace_norm: float
    direction_sup: float
    observability_gramian: np.ndarray


def h2_norm_dense(A: np.ndarray, B: np.ndarray, C: np.ndarray) -> DenseH2:
    """
    Trace H2 norm sqrt(trace(B' Wo B)) and the worst-direction norm
    sqrt(lambda_max(B' Wo B)) of x' = A x + B w, z = C x.

    Raises:
        ValueError: If A is not Hurwitz
    """
    A, B, C = (np.atleast_2d(np.asarray(X, dtype=float)) for X in (A, B, C))
    if np.max(np.linalg.eigvals(A).real) >= 0.0:
        raise ValueError("A is not Hurwitz; the H2 norm is infinite")
    Wo = linalg.solve_continuous_lyapunov(A.T, -C.T @ C)
    BWB = B.T @ Wo @ B
    BWB = 0.5 * (BWB + BWB.T)
    return DenseH2(
        trace_norm=float(math.sqrt(max(np.trace(BWB), 0.0))),
        direction_sup=float(math.sqrt(max(linalg.eigvalsh(BWB)[-1], 0.0))) if BWB.size else 0.0,
        observability_gramian=Wo,
    )


def h2_norm_ode(sys: PIESystem) -> DenseH2:
    """
    Dense H2 references for a PIE system without distributed states.

    The PIE T x' = A x + B1 w is reduced to x' = T^-1 A x + T^-1 B1 w.

    Raises:
        ValueError: If the system has distributed states
    """
    if sys.n:
        raise ValueError("h2_norm_ode requires a system with n = 0")
    T = sys.T.P_matrix()
    return h2_norm_dense(
        linalg.solve(T, sys.A.P_matrix()), linalg.solve(T, sys.B1.P_matrix()), sys.C1.P_matrix()
    )


def unit_directions(nw: int, count: int, seed: int = 0) -> np.ndarray:
    """Unit vectors in R^nw: a half-circle grid for nw = 2, axes plus random draws otherwise."""
    if nw == 1:
        return np.ones((1, 1))
    if nw == 2:
        angles = np.linspace(0.0, np.pi, count, endpoint=False)
        return np.column_stack([np.cos(angles), np.sin(angles)])
    rng = np.random.default_rng(seed)
    draws = rng.standard_normal((max(count - nw, 0), nw))
    directions = np.vstack([np.eye(nw), draws])
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def direction_sup_by_simulation(
    sys: PIESystem,
    n_directions: int = 64,
    order: int = 8,
    dt: float = 0.01,
    t_final: float = 10.0,
) -> float:
    """
    Worst-direction H2 norm by simulation: the largest L2 output energy of
    the undisturbed system started from T x(0) = B1 x0 over unit x0.
    """
    aux = auxiliary_system(sys)
    proj = project(sys, order)
    best = 0.0
    for x0 in unit_directions(aux.n_directions, n_directions):
        traj = simulate(proj, None, aux.initial_state(x0), dt, t_final)
        best = max(best, output_energy(traj))
    logger.info(f"{sys.name}: direction supremum by simulation {math.sqrt(best):.6g}")
    return math.sqrt(best)
