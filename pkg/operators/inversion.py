"""
Operator Inversion Module
Numerical inversion of coercive 4-PI operators by projection and kernel fitting
"""

from dataclasses import dataclass
from typing import Dict, List, Tuple
import logging

import numpy as np
from scipy import linalg

from polynomials.poly_matrix import PolyMatrix, MAX_DEGREE, LOWER, UPPER
from operators.pi_operator import PIOperator, column_coefficients
from operators.rl2 import (
    DEFAULT_QUADRATURE_NODES,
    gauss_legendre,
    probe_basis,
    shifted_legendre,
)

# Setup logging
logger = logging.getLogger(__name__)

DEFAULT_BASIS_DEGREE = 8
DEFAULT_TOLERANCE = 1e-4
COERCIVITY_TOL = 1e-10


class InversionError(Exception):
    """Raised when an operator cannot be inverted to the requested accuracy."""


@dataclass(frozen=True)
class InversionResult:
    """Approximate inverse with the diagnostics of the run that produced it."""

    operator: PIOperator
    degree: int
    residual: float
    coercivity: float

    @property
    def converged(self) -> bool:
        return np.isfinite(self.residual)


# =============================================================================
# COERCIVITY
# =============================================================================

def projected_matrices(
    P: PIOperator, degree: int, n_nodes: int = DEFAULT_QUADRATURE_NODES
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Galerkin matrix <phi_i, P phi_j> and Gram matrix <phi_i, phi_j> on the probe basis.

    Returns:
        Tuple (G, M)
    """
    m, n = P.dims_in
    probes = probe_basis(m, n, degree, P.domain)
    images = [P.apply(phi) for phi in probes]
    G = np.array([[phi.inner(img, n_nodes) for img in images] for phi in probes])
    M = np.array([[phi.inner(psi, n_nodes) for psi in probes] for phi in probes])
    return G, M


def coercivity_margin(P: PIOperator, degree: int, n_nodes: int = DEFAULT_QUADRATURE_NODES) -> float:
    """
    Relative coercivity of the projected operator.

    For self-adjoint P this is the smallest generalized eigenvalue of (G, M)
    over the largest in magnitude; otherwise the ratio of extreme singular
    values of the Gram-normalized Galerkin matrix.
    """
    G, M = projected_matrices(P, degree, n_nodes)
    if G.size == 0:
        return 1.0
    if P.is_self_adjoint():
        eigs = linalg.eigh(0.5 * (G + G.T), M, eigvals_only=True)
        return float(eigs[0] / max(np.max(np.abs(eigs)), np.finfo(float).tiny))
    chol = linalg.cholesky(M, lower=True)
    normalized = linalg.solve_triangular(chol, linalg.solve_triangular(chol, G, lower=True).T, lower=True).T
    sv = linalg.svdvals(normalized)
    return float(sv[-1] / max(sv[0], np.finfo(float).tiny))


# =============================================================================
# RESIDUAL
# =============================================================================

def inversion_residual(
    P: PIOperator,
    P_hat: PIOperator,
    degree: int,
    n_nodes: int = DEFAULT_QUADRATURE_NODES,
) -> float:
    """
    Largest relative error ||P_hat(P f) - f|| / ||f|| over the probe basis.

    P f is formed exactly; P_hat is applied on the quadrature grid so that
    high-degree inverses never enter symbolic products.
    """
    m, n = P.dims_in
    nodes, weights = gauss_legendre(P.domain, n_nodes)
    worst = 0.0
    for phi in probe_basis(m, n, degree, P.domain):
        image = P.apply(phi)
        finite, _, dist = P_hat.apply_on_grid(image, n_nodes)
        err_sq = float(np.sum((finite - phi.finite) ** 2))
        if n:
            err_sq += float(np.einsum("q,qi->", weights, (dist - phi.values(nodes)) ** 2))
        worst = max(worst, np.sqrt(err_sq) / max(phi.norm(n_nodes), 1e-300))
    return worst


# =============================================================================
# KERNEL FITTING
# =============================================================================

def _monomial_pairs(degree: int) -> List[Tuple[int, int]]:
    return [(i, j) for i in range(degree + 1) for j in range(degree + 1 - i)]


def _to_monomials(
    weights: Dict[Tuple[int, int], np.ndarray], domain: Tuple[float, float], rows: int, cols: int, vars: str
) -> PolyMatrix:
    """Convert Legendre-product coefficients L_i(s) L_j(theta) into monomial form."""
    out: Dict[Tuple[int, int], np.ndarray] = {}
    for (i, j), block in weights.items():
        ls = shifted_legendre(i, domain).coef
        lt = shifted_legendre(j, domain).coef
        for p, cp in enumerate(ls):
            for q, cq in enumerate(lt):
                key = (p, q)
                out[key] = out.get(key, 0.0) + cp * cq * block
    return PolyMatrix(rows, cols, out, domain, vars)


def _fit_inverse(
    P: PIOperator, degree: int, probe_degree: int, n_nodes: int
) -> PIOperator:
    """
    Least-squares fit of kernels of degree <= degree such that P_hat(P phi) = phi.

    Features use shifted Legendre polynomials for conditioning and are
    converted back to monomial coefficients at the end. Every output row of
    P_hat shares the same feature matrix, so all rows are solved at once.
    """
    m, n = P.dims_in
    domain = P.domain
    a, b = domain
    nodes, weights = gauss_legendre(domain, n_nodes)
    sqrt_w = np.sqrt(weights)
    q = nodes.size

    legendre = [shifted_legendre(i, domain) for i in range(degree + 1)]
    L_nodes = np.stack([poly(nodes) for poly in legendre], axis=1)            # (q, d+1)
    pairs = _monomial_pairs(degree)

    finite_rows, finite_targets = [], []
    dist_blocks, dist_targets = [], []
    for phi in probe_basis(m, n, probe_degree, domain):
        image = P.apply(phi)
        x = image.finite
        g_vals = image.values(nodes)                                          # (q, n)
        g_polys = [np.polynomial.Polynomial(row) for row in column_coefficients(image.distributed)]

        moments = np.einsum("q,qi,qc->ic", weights, L_nodes, g_vals).reshape(-1)
        finite_rows.append(np.concatenate([x, moments]))
        finite_targets.append(phi.finite)

        if not n:
            continue
        features = [
            (L_nodes[:, :, None] * x[None, None, :]).reshape(q, -1),
            (L_nodes[:, :, None] * g_vals[:, None, :]).reshape(q, -1),
        ]
        for kind in (LOWER, UPPER):
            anti = {}
            for j in range(degree + 1):
                cols = []
                for g in g_polys:
                    prim = (legendre[j] * g).integ()
                    cols.append(prim(nodes) - prim(a) if kind == LOWER else prim(b) - prim(nodes))
                anti[j] = np.stack(cols, axis=1)                              # (q, n)
            features.append(
                np.concatenate([L_nodes[:, i:i + 1] * anti[j] for i, j in pairs], axis=1)
            )
        dist_blocks.append(np.concatenate(features, axis=1) * sqrt_w[:, None])
        dist_targets.append(phi.values(nodes) * sqrt_w[:, None])

    blocks = {}
    if m:
        W, *_ = linalg.lstsq(np.array(finite_rows), np.array(finite_targets))
        blocks["P"] = W[:m].T
        blocks["Q1"] = _to_monomials(
            {(i, 0): W[m + i * n:m + (i + 1) * n].T for i in range(degree + 1)} if n else {},
            domain, m, n, "s",
        )
    if n:
        W, *_ = linalg.lstsq(np.vstack(dist_blocks), np.vstack(dist_targets))
        offset = 0
        blocks["Q2"] = _to_monomials(
            {(i, 0): W[offset + i * m:offset + (i + 1) * m].T for i in range(degree + 1)} if m else {},
            domain, n, m, "s",
        )
        offset += m * (degree + 1)
        blocks["R0"] = _to_monomials(
            {(i, 0): W[offset + i * n:offset + (i + 1) * n].T for i in range(degree + 1)},
            domain, n, n, "s",
        )
        offset += n * (degree + 1)
        for name in ("R1", "R2"):
            blocks[name] = _to_monomials(
                {pair: W[offset + k * n:offset + (k + 1) * n].T for k, pair in enumerate(pairs)},
                domain, n, n, "st",
            )
            offset += n * len(pairs)
    return PIOperator.build(dims_in=(m, n), dims_out=(m, n), domain=domain, **blocks)


def _exact_inverse(P: PIOperator) -> PIOperator:
    """Inverse of a block-diagonal matrix plus constant multiplier."""
    m, n = P.dims_in
    P_inv = np.linalg.inv(P.P_matrix()) if m else np.zeros((0, 0))
    R0_inv = None
    if n:
        R0_inv = PolyMatrix.constant(np.linalg.inv(P.R0.evaluate(s=P.domain[0])), P.domain, "s")
    return PIOperator.build(P=P_inv, R0=R0_inv, dims_in=(m, n), dims_out=(m, n), domain=P.domain)


def _is_exactly_invertible(P: PIOperator) -> bool:
    return (
        P.Q1.is_zero and P.Q2.is_zero and P.R1.is_zero and P.R2.is_zero
        and P.R0.degree == 0
    )


# =============================================================================
# PUBLIC API
# =============================================================================

def invert_pi_with_residual(
    P: PIOperator,
    basis_degree: int = DEFAULT_BASIS_DEGREE,
    tol: float = DEFAULT_TOLERANCE,
    max_degree: int = MAX_DEGREE,
    n_nodes: int = DEFAULT_QUADRATURE_NODES,
    strict: bool = True,
) -> InversionResult:
    """
    Approximate P^-1 by a 4-PI operator, doubling the kernel degree until the
    residual drops below tol.

    Args:
        P: Square, coercive, decision-free operator
        basis_degree: Initial kernel degree
        tol: Relative residual tolerance on the probe set
        max_degree: Largest kernel degree tried
        n_nodes: Quadrature nodes
        strict: Raise when the tolerance is missed at max_degree; otherwise
            return the best attempt

    Returns:
        InversionResult

    Raises:
        InversionError: If P is not coercive on the projected space, or the
            residual stays above tol and strict is set
        ValueError: If P is not square or depends on decision variables
    """
    if P.dims_in != P.dims_out:
        raise ValueError(f"Cannot invert non-square operator {P.dims_in}->{P.dims_out}")
    if not P.is_decision_free:
        raise ValueError("Cannot invert a decision-dependent operator")

    m, n = P.dims_in
    headroom = max(MAX_DEGREE - P.degree - 1, 0)
    probe_degree = min(basis_degree, headroom)

    margin = coercivity_margin(P, probe_degree, n_nodes)
    if margin <= COERCIVITY_TOL:
        raise InversionError(f"Operator is not coercive on the projected space (margin {margin:.3e})")

    if n == 0 or _is_exactly_invertible(P):
        inverse = _exact_inverse(P)
        residual = inversion_residual(P, inverse, probe_degree, n_nodes)
        logger.info(f"Exact inverse formed, residual {residual:.3e}")
        return InversionResult(inverse, 0, residual, margin)

    self_adjoint = P.is_self_adjoint()
    best = None
    degree = basis_degree
    while True:
        degree = min(degree, max_degree)
        fit_degree = min(degree + 2, headroom)
        inverse = _fit_inverse(P, degree, fit_degree, n_nodes)
        if self_adjoint:
            inverse = (inverse + inverse.adjoint()).scale(0.5)
        residual = inversion_residual(P, inverse, min(degree, headroom), n_nodes)
        logger.info(f"Inversion at degree {degree}: residual {residual:.3e}")
        if best is None or residual < best.residual:
            best = InversionResult(inverse, degree, residual, margin)
        if residual <= tol or degree >= max_degree:
            break
        logger.warning(f"Inversion residual {residual:.3e} above {tol:.1e}, escalating degree")
        degree *= 2

    if best.residual > tol:
        message = f"Inversion residual {best.residual:.3e} exceeds {tol:.1e} at degree {best.degree}"
        if strict:
            raise InversionError(message)
        logger.warning(message)
    return best


def invert_pi(
    P: PIOperator,
    basis_degree: int = DEFAULT_BASIS_DEGREE,
    tol: float = DEFAULT_TOLERANCE,
) -> PIOperator:
    """
    Approximate inverse of a coercive 4-PI operator.

    Example:
        >>> P_hat = invert_pi(PIOperator.multiplier(PolyMatrix.scalar({(0, 0): 2.0})))
    """
    return invert_pi_with_residual(P, basis_degree, tol).operator
