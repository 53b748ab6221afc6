"""
Certificates Module
Results of norm-bound and estimator programs, probe-based re-verification of
their inequalities, and persistence / text reports
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union
import logging
import math

import numpy as np
from scipy import linalg

from polynomials.poly_matrix import PolyMatrix
from operators.pi_operator import PIOperator
from operators.rl2 import DEFAULT_QUADRATURE_NODES, RL2Function, gauss_legendre, probe_basis
from operators.serialization import save_operators
from pie.system import ObserverGain, PIESystem, error_system
from lpi.status import OPTIMAL
from synthesis.inequalities import (
    gramian_inequality,
    input_block,
    input_gramian,
    lyapunov_operator,
    output_block,
)

# Setup logging
logger = logging.getLogger(__name__)

DEFAULT_PROBES = 100
DEFAULT_SOLVER_TOL = 1e-6
PROBE_DEGREE = 4


# =============================================================================
# RESULT TYPES
# =============================================================================

@dataclass
class NormCertificate:
    """
    Solved H2 norm bound.

    For the Gramian program gamma is the square root of the optimal gamma^2
    and W holds B1* P B1; for the Schur program W is the solved slack matrix.
    """

    gamma: float
    P: Optional[PIOperator]
    W: Optional[np.ndarray]
    eps: float
    status: str
    degree: int
    method: str
    solver: str = ""
    inaccurate: bool = False
    system: str = ""

    @property
    def feasible(self) -> bool:
        return self.status == OPTIMAL and self.P is not None

    def summary(self) -> str:
        if not self.feasible:
            return f"{self.method} bound for {self.system}: {self.status} at degree {self.degree}"
        return f"{self.method} bound for {self.system}: gamma = {self.gamma:.6g} (degree {self.degree})"


@dataclass
class SynthesisResult:
    """Solved estimator synthesis with its reconstructed gain L = P^-1 Z."""

    gamma: float
    P: Optional[PIOperator]
    Z: Optional[PIOperator]
    L: Optional[ObserverGain]
    inversion_residual: float
    W: Optional[np.ndarray] = None
    eps: float = 0.0
    status: str = OPTIMAL
    degree: int = 0
    solver: str = ""
    inaccurate: bool = False
    system: str = ""
    warning: bool = False

    @property
    def feasible(self) -> bool:
        return self.status == OPTIMAL and self.L is not None

    def summary(self) -> str:
        if not self.feasible:
            return f"estimator for {self.system}: {self.status} at degree {self.degree}"
        flag = " (inversion residual above tolerance)" if self.warning else ""
        return (
            f"estimator for {self.system}: gamma = {self.gamma:.6g}, "
            f"inversion residual {self.inversion_residual:.2e}{flag}"
        )


@dataclass
class Verification:
    """Worst probe margins per constraint; non-negative means satisfied."""

    margins: Dict[str, float] = field(default_factory=dict)
    tolerance: float = 10 * DEFAULT_SOLVER_TOL

    @property
    def passed(self) -> bool:
        return all(value >= -self.tolerance for value in self.margins.values())

    @property
    def worst(self) -> float:
        return min(self.margins.values(), default=math.inf)


# =============================================================================
# PROBING
# =============================================================================

def quadratic_form(X: PIOperator, f: RL2Function, n_nodes: int = DEFAULT_QUADRATURE_NODES) -> float:
    """<f, X f> for a square decision-free operator."""
    finite, nodes, dist = X.apply_on_grid(f, n_nodes)
    value = float(f.finite @ finite)
    if X.dims_out[1]:
        _, weights = gauss_legendre(X.domain, n_nodes)
        value += float(np.einsum("q,qi,qi->", weights, f.values(nodes), dist))
    return value


def probe_margin(
    X: PIOperator,
    eps: float = 0.0,
    negative: bool = False,
    n_probes: int = DEFAULT_PROBES,
    rng: Optional[np.random.Generator] = None,
    n_nodes: int = DEFAULT_QUADRATURE_NODES,
) -> float:
    """
    Worst relative margin of X >= eps I (or X <= -eps I) over random probes.

    The Rayleigh quotient of each probe is shifted by eps and divided by
    max(1, largest |quotient|) so margins are comparable across operators.
    """
    rng = rng or np.random.default_rng(0)
    m, n = X.dims_in
    sign = -1.0 if negative else 1.0
    quotients = []
    for _ in range(n_probes):
        f = RL2Function.random(rng, m, n, PROBE_DEGREE, X.domain)
        norm_sq = f.inner(f, n_nodes)
        if norm_sq <= 0.0:
            continue
        quotients.append(sign * quadratic_form(X, f, n_nodes) / norm_sq)
    if not quotients:
        return math.inf
    quotients = np.asarray(quotients)
    return float((quotients.min() - eps) / max(1.0, np.max(np.abs(quotients))))


def projected_spectrum(X: PIOperator, degree: int = 8, n_nodes: int = DEFAULT_QUADRATURE_NODES) -> np.ndarray:
    """
    Generalized eigenvalues of the symmetric part of X on the probe basis.

    Exact for matrix operators; for distributed operators the smallest value
    is a Rayleigh-Ritz upper bound on the bottom of the spectrum.
    """
    m, n = X.dims_in
    probes = probe_basis(m, n, degree if n else 0, X.domain)
    if not probes:
        return np.zeros(0)
    if n == 0:
        M = X.P_matrix()
        return linalg.eigvalsh(0.5 * (M + M.T))
    nodes, weights = gauss_legendre(X.domain, n_nodes)
    values = [phi.values(nodes) for phi in probes]
    images = [X.apply_on_grid(phi, n_nodes) for phi in probes]
    K = len(probes)
    G = np.zeros((K, K))
    M = np.zeros((K, K))
    for i, phi in enumerate(probes):
        for j, (finite, _, dist) in enumerate(images):
            G[i, j] = phi.finite @ finite + np.einsum("q,qc,qc->", weights, values[i], dist)
            M[i, j] = phi.finite @ probes[j].finite + np.einsum("q,qc,qc->", weights, values[i], values[j])
    return linalg.eigh(0.5 * (G + G.T), M, eigvals_only=True)


# =============================================================================
# RE-VERIFICATION
# =============================================================================

def _gamma_poly(gamma: float, domain) -> PolyMatrix:
    return PolyMatrix.constant([[gamma]], domain)


def verify_certificate(
    sys: PIESystem,
    cert: NormCertificate,
    n_probes: int = DEFAULT_PROBES,
    solver_tol: float = DEFAULT_SOLVER_TOL,
    seed: int = 0,
) -> Verification:
    """
    Substitute a solved certificate back into its inequalities.

    Raises:
        ValueError: If the certificate is not feasible
    """
    if not cert.feasible:
        raise ValueError(f"Cannot verify a certificate with status '{cert.status}'")
    rng = np.random.default_rng(seed)
    P = cert.P
    margins = {"positivity": probe_margin(P, 0.0, False, n_probes, rng)}
    if cert.method == "gramian":
        margins["lyapunov"] = probe_margin(gramian_inequality(sys, P), cert.eps, True, n_probes, rng)
        traced = float(np.trace(input_gramian(sys, P).evaluate())) if sys.nw else 0.0
        margins["trace"] = (cert.gamma ** 2 - traced) / max(1.0, cert.gamma ** 2)
    else:
        W = PolyMatrix.constant(cert.W, sys.domain) if sys.nw else PolyMatrix.zeros(0, 0, sys.domain)
        gamma = _gamma_poly(cert.gamma, sys.domain)
        margins["output"] = probe_margin(
            output_block(sys, gamma, lyapunov_operator(sys, P)), cert.eps, True, n_probes, rng
        )
        margins["input"] = probe_margin(input_block(sys, P, W), cert.eps, False, n_probes, rng)
        margins["trace"] = (cert.gamma - float(np.trace(cert.W))) / max(1.0, cert.gamma)
    result = Verification(margins, 10 * solver_tol)
    logger.info(f"Verified {cert.method} certificate: worst margin {result.worst:.3e}, passed={result.passed}")
    return result


def verify_synthesis(
    sys: PIESystem,
    result: SynthesisResult,
    n_probes: int = DEFAULT_PROBES,
    solver_tol: float = DEFAULT_SOLVER_TOL,
    seed: int = 0,
) -> Verification:
    """
    Re-check the estimator inequalities at the solved (P, Z, W, gamma) and
    the output inequality of the error system built from the reconstructed L.

    The error-system margin is taken against zero rather than eps: P L only
    matches Z up to the inversion residual.
    """
    if not result.feasible:
        raise ValueError(f"Cannot verify a synthesis with status '{result.status}'")
    rng = np.random.default_rng(seed)
    P, Z = result.P, result.Z
    W = PolyMatrix.constant(result.W, sys.domain) if sys.nw else PolyMatrix.zeros(0, 0, sys.domain)
    gamma = _gamma_poly(result.gamma, sys.domain)
    err = error_system(sys, result.L)
    margins = {
        "positivity": probe_margin(P, 0.0, False, n_probes, rng),
        "output": probe_margin(
            output_block(sys, gamma, lyapunov_operator(sys, P, Z)), result.eps, True, n_probes, rng
        ),
        "input": probe_margin(input_block(sys, P, W, Z), result.eps, False, n_probes, rng),
        "error_output": probe_margin(
            output_block(err, gamma, lyapunov_operator(err, P)), 0.0, True, n_probes, rng
        ),
        "trace": (result.gamma - float(np.trace(result.W))) / max(1.0, result.gamma),
    }
    verification = Verification(margins, 10 * solver_tol)
    logger.info(f"Verified estimator: worst margin {verification.worst:.3e}, passed={verification.passed}")
    return verification


# =============================================================================
# PERSISTENCE AND REPORTS
# =============================================================================

def save_certificate(result: Union[NormCertificate, SynthesisResult], path: Union[str, Path]) -> Path:
    """Write the solved operators and scalars of a result."""
    if not result.feasible:
        raise ValueError(f"Nothing to save for status '{result.status}'")
    items = {"P": result.P, "W": np.asarray(result.W).tolist(), "gamma": result.gamma}
    meta = {"status": result.status, "degree": result.degree, "eps": result.eps, "system": result.system}
    if isinstance(result, SynthesisResult):
        items.update({"Z": result.Z, "L1": result.L.L1.tolist(), "L2": result.L.L2})
        meta.update({"kind": "synthesis_result", "inversion_residual": result.inversion_residual})
    else:
        meta.update({"kind": "norm_certificate", "method": result.method})
    return save_operators(path, items, meta=meta)


def write_report(
    path: Union[str, Path],
    result: Union[NormCertificate, SynthesisResult],
    verification: Optional[Verification] = None,
) -> Path:
    """
    Human-readable text report of a run.

    Returns:
        The path written
    """
    lines: List[str] = [
        f"# {result.summary()}",
        f"system: {result.system}",
        f"status: {result.status}",
        f"solver: {result.solver}{' (inexact)' if result.inaccurate else ''}",
        f"degree: {result.degree}",
        f"eps: {result.eps:g}",
    ]
    if result.feasible:
        lines.append(f"gamma: {result.gamma!r}")
        if result.W is not None and np.size(result.W):
            lines.append(f"trace(W): {float(np.trace(result.W))!r}")
    if isinstance(result, NormCertificate):
        lines.insert(1, f"method: {result.method}")
    else:
        lines.append(f"inversion_residual: {result.inversion_residual:.3e}")
        lines.append(f"inversion_warning: {result.warning}")
        if result.L is not None:
            lines.append(f"L1: {np.array2string(result.L.L1, precision=6)}")
            lines.append(f"L2 degree: {result.L.L2.degree}")
    if verification is not None:
        lines.append(f"verification: {'passed' if verification.passed else 'FAILED'}")
        for name, margin in verification.margins.items():
            lines.append(f"  margin[{name}]: {margin:.3e}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    logger.info(f"Wrote report {path}")
    return path
