"""
RL2 Function Module
Elements of R^m x L2^n[a, b] with polynomial distributed parts, plus quadrature
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence, Tuple
import logging

import numpy as np
from numpy.polynomial import legendre as npleg

from polynomials.poly_matrix import PolyMatrix, vstack

# Setup logging
logger = logging.getLogger(__name__)

DEFAULT_QUADRATURE_NODES = 64


@lru_cache(maxsize=32)
def _reference_rule(n_nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    return npleg.leggauss(n_nodes)


def gauss_legendre(domain: Sequence[float], n_nodes: int = DEFAULT_QUADRATURE_NODES) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Legendre nodes and weights mapped to [a, b].

    Args:
        domain: Interval (a, b)
        n_nodes: Number of nodes (exact for degree 2*n_nodes - 1)

    Returns:
        Tuple of (nodes, weights)
    """
    a, b = float(domain[0]), float(domain[1])
    x, w = _reference_rule(int(n_nodes))
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


@lru_cache(maxsize=256)
def shifted_legendre(degree: int, domain: Tuple[float, float] = (0.0, 1.0)) -> np.polynomial.Polynomial:
    """Legendre polynomial P_k((2s - a - b) / (b - a)) in monomials of s."""
    a, b = float(domain[0]), float(domain[1])
    ref = npleg.leg2poly(np.eye(degree + 1)[degree])
    return np.polynomial.Polynomial(ref)(
        np.polynomial.Polynomial([-(a + b) / (b - a), 2.0 / (b - a)])
    )


def legendre_polynomial(degree: int, domain: Sequence[float] = (0.0, 1.0)) -> PolyMatrix:
    """Legendre polynomial of the given degree shifted to [a, b], as a 1 x 1 PolyMatrix."""
    shifted = shifted_legendre(degree, (float(domain[0]), float(domain[1])))
    return PolyMatrix.scalar({(i, 0): c for i, c in enumerate(shifted.coef)}, domain)


@dataclass(frozen=True, eq=False)
class RL2Function:
    """
    Element (x, f) of R^m x L2^n[a, b].

    The finite part x is a real vector; the distributed part f is an n x 1
    polynomial matrix in s.
    """

    finite: np.ndarray
    distributed: PolyMatrix

    def __post_init__(self):
        finite = np.asarray(self.finite, dtype=float).reshape(-1)
        object.__setattr__(self, "finite", finite)
        if self.distributed.cols != 1:
            raise ValueError("Distributed part must be a column (n x 1)")
        if self.distributed.vars == "st":
            raise ValueError("Distributed part must depend on s only")
        if not self.distributed.is_decision_free:
            raise ValueError("Distributed part must be decision-free")

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def make(
        cls,
        finite: Optional[Sequence[float]] = None,
        components: Optional[Sequence[Sequence[float]]] = None,
        domain: Sequence[float] = (0.0, 1.0),
    ) -> "RL2Function":
        """
        Build from a finite vector and per-component monomial coefficients.

        Args:
            finite: Finite part (length m), empty if None
            components: One coefficient list [c0, c1, ...] per distributed
                component, meaning c0 + c1*s + ...
            domain: Interval (a, b)

        Example:
            >>> RL2Function.make([3.0], [[0.0, 1.0]])   # (3, s)
        """
        finite = np.zeros(0) if finite is None else np.asarray(finite, dtype=float)
        components = components or []
        n = len(components)
        coeffs = {}
        for c, comp in enumerate(components):
            for i, value in enumerate(comp):
                block = coeffs.setdefault((i, 0), np.zeros((n, 1)))
                block[c, 0] = value
        return cls(finite, PolyMatrix(n, 1, coeffs, domain))

    @classmethod
    def zero(cls, m: int, n: int, domain: Sequence[float] = (0.0, 1.0)) -> "RL2Function":
        return cls(np.zeros(m), PolyMatrix.zeros(n, 1, domain))

    @classmethod
    def random(
        cls,
        rng: np.random.Generator,
        m: int,
        n: int,
        degree: int = 4,
        domain: Sequence[float] = (0.0, 1.0),
    ) -> "RL2Function":
        """Random probe with Legendre-distributed coefficients of bounded degree."""
        dist = PolyMatrix.zeros(n, 1, domain)
        for k in range(degree + 1):
            weights = rng.standard_normal((n, 1))
            dist = dist + PolyMatrix.constant(weights, domain) @ legendre_polynomial(k, domain)
        return cls(rng.standard_normal(m), dist)

    # ------------------------------------------------------------------
    # Properties and arithmetic
    # ------------------------------------------------------------------

    @property
    def m(self) -> int:
        return self.finite.size

    @property
    def n(self) -> int:
        return self.distributed.rows

    @property
    def domain(self) -> Tuple[float, float]:
        return self.distributed.domain

    def __add__(self, other: "RL2Function") -> "RL2Function":
        if (self.m, self.n) != (other.m, other.n):
            raise ValueError("Dimension mismatch in RL2 addition")
        return RL2Function(self.finite + other.finite, self.distributed + other.distributed)

    def __sub__(self, other: "RL2Function") -> "RL2Function":
        return self + other.scale(-1.0)

    def scale(self, factor: float) -> "RL2Function":
        return RL2Function(factor * self.finite, self.distributed.scale(factor))

    def concat(self, other: "RL2Function") -> "RL2Function":
        """Stack finite parts and distributed parts separately."""
        return RL2Function(
            np.concatenate([self.finite, other.finite]),
            vstack([self.distributed, other.distributed]),
        )

    def split(self, m_first: int, n_first: int) -> Tuple["RL2Function", "RL2Function"]:
        """Inverse of concat."""
        d = self.distributed
        return (
            RL2Function(self.finite[:m_first], d.block(slice(0, n_first), slice(0, 1))),
            RL2Function(self.finite[m_first:], d.block(slice(n_first, d.rows), slice(0, 1))),
        )

    # ------------------------------------------------------------------
    # Evaluation and inner products
    # ------------------------------------------------------------------

    def values(self, s: np.ndarray) -> np.ndarray:
        """Distributed part at the points s, shape (len(s), n)."""
        return self.distributed.evaluate_grid(np.asarray(s))[:, :, 0]

    def inner(self, other: "RL2Function", n_nodes: int = DEFAULT_QUADRATURE_NODES) -> float:
        """RL2 inner product x1'y1 + <f, g>_L2 by Gauss-Legendre quadrature."""
        if (self.m, self.n) != (other.m, other.n):
            raise ValueError("Dimension mismatch in RL2 inner product")
        nodes, weights = gauss_legendre(self.domain, n_nodes)
        dist = np.einsum("q,qi,qi->", weights, self.values(nodes), other.values(nodes))
        return float(self.finite @ other.finite + dist)

    def norm(self, n_nodes: int = DEFAULT_QUADRATURE_NODES) -> float:
        return float(np.sqrt(max(self.inner(self, n_nodes), 0.0)))

    def __repr__(self) -> str:
        return f"<RL2Function(m={self.m}, n={self.n}, degree={self.distributed.degree})>"


def probe_basis(
    m: int, n: int, degree: int, domain: Sequence[float] = (0.0, 1.0)
) -> list:
    """
    Unit finite vectors plus shifted Legendre polynomials in each component.

    Returns:
        List of RL2Function probes (m + n*(degree+1) of them)
    """
    probes = []
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        probes.append(RL2Function(e, PolyMatrix.zeros(n, 1, domain)))
    for c in range(n):
        selector = np.zeros((n, 1))
        selector[c, 0] = 1.0
        for k in range(degree + 1):
            dist = PolyMatrix.constant(selector, domain) @ legendre_polynomial(k, domain)
            probes.append(RL2Function(np.zeros(m), dist))
    return probes
