"""
Galerkin Projection Module
Chebyshev-Galerkin projection of PIE dynamics onto a descriptor ODE
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union
import logging

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial
from scipy import linalg

from polynomials.poly_matrix import PolyMatrix
from operators.pi_operator import PIOperator
from operators.rl2 import DEFAULT_QUADRATURE_NODES, RL2Function, gauss_legendre
from pie.system import ObserverGain, PIESystem

# Setup logging
logger = logging.getLogger(__name__)

DEFAULT_ORDER = 8

Profile = Callable[[np.ndarray], np.ndarray]


def chebyshev_polynomial(k: int, domain: Sequence[float] = (0.0, 1.0)) -> PolyMatrix:
    """First-kind Chebyshev polynomial T_k mapped to [a, b], as a 1 x 1 PolyMatrix in s."""
    mono = Chebyshev.basis(k, domain=[float(domain[0]), float(domain[1])]).convert(kind=Polynomial)
    return PolyMatrix.scalar({(i, 0): c for i, c in enumerate(mono.coef)}, domain)


def lobatto_points(count: int, domain: Sequence[float] = (0.0, 1.0)) -> np.ndarray:
    """Chebyshev-Gauss-Lobatto points on [a, b] in increasing order."""
    a, b = float(domain[0]), float(domain[1])
    if count < 2:
        return np.array([0.5 * (a + b)])
    x = -np.cos(np.pi * np.arange(count) / (count - 1))
    return 0.5 * (a + b) + 0.5 * (b - a) * x


def chebyshev_basis(m: int, n: int, order: int, domain: Sequence[float] = (0.0, 1.0)) -> List[RL2Function]:
    """
    Basis of R^m x L2^n: unit finite vectors, then T_0..T_order in each
    distributed component.
    """
    basis = []
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        basis.append(RL2Function(e, PolyMatrix.zeros(n, 1, domain)))
    cheb = [chebyshev_polynomial(k, domain) for k in range(order + 1)]
    for c in range(n):
        selector = np.zeros((n, 1))
        selector[c, 0] = 1.0
        for poly in cheb:
            basis.append(RL2Function(np.zeros(m), PolyMatrix.constant(selector, domain) @ poly))
    return basis


@dataclass
class ProjectedSystem:
    """
    Descriptor ODE  M_T c' = M_A c + M_B w,  z = M_C1 c,  y = M_C2 c + D21 w
    for the coefficients c of the PIE state in the Chebyshev basis.
    """

    order: int
    domain: tuple
    m: int
    n: int
    M_T: np.ndarray
    M_A: np.ndarray
    M_B: np.ndarray
    M_C1: np.ndarray
    M_C2: np.ndarray
    D21: np.ndarray
    gram: np.ndarray
    basis: List[RL2Function] = field(repr=False)
    physical: List[RL2Function] = field(repr=False)
    n_nodes: int = DEFAULT_QUADRATURE_NODES
    name: str = "pie"

    @property
    def size(self) -> int:
        return self.M_T.shape[0]

    @property
    def nodes(self) -> np.ndarray:
        return gauss_legendre(self.domain, self.n_nodes)[0]

    @property
    def weights(self) -> np.ndarray:
        return gauss_legendre(self.domain, self.n_nodes)[1]

    # ------------------------------------------------------------------
    # Reconstruction
    # ------------------------------------------------------------------

    def field_matrix(self, s: np.ndarray) -> np.ndarray:
        """Values of the physical images T phi_j at s, shape (len(s), n, K)."""
        s = np.asarray(s, dtype=float).reshape(-1)
        if not self.physical:
            return np.zeros((s.size, self.n, 0))
        return np.stack([img.values(s) for img in self.physical], axis=-1)

    def finite_matrix(self) -> np.ndarray:
        """Finite parts of T phi_j, shape (m, K)."""
        if not self.physical:
            return np.zeros((self.m, 0))
        return np.column_stack([img.finite for img in self.physical])

    def state_matrix(self, s: np.ndarray) -> np.ndarray:
        """Values of the basis functions phi_j at s, shape (len(s), n, K)."""
        s = np.asarray(s, dtype=float).reshape(-1)
        if not self.basis:
            return np.zeros((s.size, self.n, 0))
        return np.stack([phi.values(s) for phi in self.basis], axis=-1)

    # ------------------------------------------------------------------
    # Projection of inputs and initial conditions
    # ------------------------------------------------------------------

    def input_matrix(self, op: PIOperator) -> np.ndarray:
        """<phi_i, op e_k> for an operator from R^k into the state space."""
        k = op.dims_in[0]
        out = np.zeros((self.size, k))
        for col in range(k):
            e = np.zeros(k)
            e[col] = 1.0
            image = op.apply(RL2Function(e, PolyMatrix.zeros(0, 1, self.domain)))
            out[:, col] = [phi.inner(image, self.n_nodes) for phi in self.basis]
        return out

    def gain_matrix(self, L: ObserverGain) -> np.ndarray:
        """Projection of an observer gain, shape (K, ny)."""
        if L.state_dims != (self.m, self.n):
            raise ValueError(f"Gain acts on {L.state_dims}, projection on {(self.m, self.n)}")
        return self.input_matrix(L.as_operator())

    def project_state(self, f: RL2Function) -> np.ndarray:
        """Coefficients of the orthogonal projection of a PIE state f."""
        rhs = np.array([phi.inner(f, self.n_nodes) for phi in self.basis])
        return linalg.solve(self.gram, rhs, assume_a="pos") if rhs.size else rhs

    def initial_coefficients(
        self,
        x0: Union[RL2Function, Profile, None] = None,
        finite0: Optional[Sequence[float]] = None,
    ) -> np.ndarray:
        """
        Coefficients c with T (sum c_j phi_j) closest to a physical state in L2.

        Args:
            x0: Physical state T x(0), either an RL2Function or a profile
                s -> values of shape (len(s), n); zero when None
            finite0: Finite part of T x(0) when x0 is a profile

        Returns:
            Coefficient vector of length K
        """
        if isinstance(x0, RL2Function):
            finite0 = x0.finite
            profile = x0.values
        else:
            profile = x0
        finite0 = np.zeros(self.m) if finite0 is None else np.asarray(finite0, dtype=float).reshape(-1)
        if finite0.size != self.m:
            raise ValueError(f"Finite initial state has length {finite0.size}, expected {self.m}")
        nodes, weights = gauss_legendre(self.domain, self.n_nodes)
        root = np.sqrt(weights)
        target = np.zeros((nodes.size, self.n)) if profile is None else np.asarray(profile(nodes), dtype=float)
        target = target.reshape(nodes.size, self.n)
        rows = [self.finite_matrix()]
        rhs = [finite0]
        if self.n:
            F = self.field_matrix(nodes) * root[:, None, None]
            rows.append(F.reshape(-1, self.size))
            rhs.append((target * root[:, None]).reshape(-1))
        coeffs, *_ = linalg.lstsq(np.vstack(rows), np.concatenate(rhs))
        return coeffs


# =============================================================================
# PROJECTION
# =============================================================================

def galerkin_matrix(op: PIOperator, basis: List[RL2Function], n_nodes: int = DEFAULT_QUADRATURE_NODES) -> np.ndarray:
    """Matrix of entries <phi_i, op phi_j>."""
    images = [op.apply(phi) for phi in basis]
    return np.array([[phi.inner(img, n_nodes) for img in images] for phi in basis]).reshape(len(basis), len(basis))


def output_matrix(op: PIOperator, basis: List[RL2Function]) -> np.ndarray:
    """Columns op phi_j for an operator into R^k."""
    k = op.dims_out[0]
    if not basis:
        return np.zeros((k, 0))
    return np.column_stack([op.apply(phi).finite for phi in basis]).reshape(k, len(basis))


def project(sys: PIESystem, order: int = DEFAULT_ORDER, n_nodes: int = DEFAULT_QUADRATURE_NODES) -> ProjectedSystem:
    """
    Project a PIE system onto Chebyshev polynomials of degree <= order.

    Args:
        sys: PIE system
        order: Highest Chebyshev degree per distributed component
        n_nodes: Gauss-Legendre nodes for the inner products

    Raises:
        ValueError: If order < 1
    """
    if order < 1:
        raise ValueError(f"Basis order must be at least 1, got {order}")
    basis = chebyshev_basis(sys.m, sys.n, order, sys.domain)
    physical = [sys.T.apply(phi) for phi in basis]
    gram = np.array([[phi.inner(psi, n_nodes) for psi in basis] for phi in basis]).reshape(len(basis), len(basis))
    proj = ProjectedSystem(
        order=order,
        domain=sys.domain,
        m=sys.m,
        n=sys.n,
        M_T=galerkin_matrix(sys.T, basis, n_nodes),
        M_A=galerkin_matrix(sys.A, basis, n_nodes),
        M_B=np.zeros((len(basis), sys.nw)),
        M_C1=output_matrix(sys.C1, basis),
        M_C2=output_matrix(sys.C2, basis),
        D21=np.asarray(sys.D21, dtype=float),
        gram=gram,
        basis=basis,
        physical=physical,
        n_nodes=n_nodes,
        name=sys.name,
    )
    proj.M_B = proj.input_matrix(sys.B1)
    logger.info(f"Projected {sys.name} onto order {order}: {proj.size} coefficients")
    return proj
