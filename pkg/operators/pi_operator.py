"""
PI Operator Module
The 4-PI operator algebra: application, composition, addition, adjoint and concatenation

A 4-PI operator maps (x, f) in R^m1 x L2^n1[a, b] to

    ( P x + int_a^b Q1(th) f(th) dth ,
      Q2(s) x + R0(s) f(s) + int_a^s R1(s, th) f(th) dth + int_s^b R2(s, th) f(th) dth )

in R^m2 x L2^n2[a, b].
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple
import logging

import numpy as np

from polynomials.poly_matrix import (
    PolyMatrix,
    LOWER,
    UPPER,
    VARS_CONST,
    VARS_S,
    VARS_ST,
    hstack,
    integrate_product,
    vstack,
)
from operators.rl2 import RL2Function, gauss_legendre, DEFAULT_QUADRATURE_NODES

# Setup logging
logger = logging.getLogger(__name__)

BLOCK_NAMES = ("P", "Q1", "Q2", "R0", "R1", "R2")

# theta -> s and s -> theta substitutions
_THETA_TO_S = {"theta": (0.0, 1.0, 0.0)}
_S_TO_THETA = {"s": (0.0, 0.0, 1.0)}


def _as_poly(value, rows: int, cols: int, domain, vars: str) -> PolyMatrix:
    """Coerce None / array / PolyMatrix into a PolyMatrix of the given shape."""
    if value is None:
        return PolyMatrix.zeros(rows, cols, domain, vars)
    if isinstance(value, PolyMatrix):
        if value.shape != (rows, cols):
            raise ValueError(f"Block of shape {value.shape} does not match ({rows}, {cols})")
        if value.domain != tuple(domain):
            raise ValueError(f"Block domain {value.domain} does not match {tuple(domain)}")
        return value.with_vars(vars)
    arr = np.asarray(value, dtype=float)
    if arr.size == 0:
        return PolyMatrix.zeros(rows, cols, domain, vars)
    return PolyMatrix(rows, cols, {(0, 0): arr.reshape(rows, cols)}, domain, vars)


def _in_theta(poly: PolyMatrix) -> PolyMatrix:
    """Q(s) -> Q(theta)."""
    return poly.substitute(_S_TO_THETA)


def _to_s(poly: PolyMatrix) -> PolyMatrix:
    """Collapse a kernel that depends on a single variable onto s."""
    if poly.degree_s > 0 and poly.degree_theta > 0:
        raise ValueError("Kernel depends on both variables")
    return poly.substitute(_THETA_TO_S)


@dataclass(frozen=True, eq=False)
class PIOperator:
    """
    4-PI operator on R^m1 x L2^n1[a, b] -> R^m2 x L2^n2[a, b].

    Blocks with a zero dimension are empty. With n1 = n2 = 0 the operator is
    exactly the matrix P. Coefficient blocks may be affine in LPI decision
    variables (see PolyMatrix).
    """

    dims_in: Tuple[int, int]
    dims_out: Tuple[int, int]
    domain: Tuple[float, float]
    P: PolyMatrix
    Q1: PolyMatrix
    Q2: PolyMatrix
    R0: PolyMatrix
    R1: PolyMatrix
    R2: PolyMatrix

    def __post_init__(self):
        m1, n1 = (int(v) for v in self.dims_in)
        m2, n2 = (int(v) for v in self.dims_out)
        dom = (float(self.domain[0]), float(self.domain[1]))
        object.__setattr__(self, "dims_in", (m1, n1))
        object.__setattr__(self, "dims_out", (m2, n2))
        object.__setattr__(self, "domain", dom)
        shapes = {
            "P": ((m2, m1), VARS_CONST),
            "Q1": ((m2, n1), VARS_S),
            "Q2": ((n2, m1), VARS_S),
            "R0": ((n2, n1), VARS_S),
            "R1": ((n2, n1), VARS_ST),
            "R2": ((n2, n1), VARS_ST),
        }
        for name, ((rows, cols), vars) in shapes.items():
            block = _as_poly(getattr(self, name), rows, cols, dom, vars)
            if name == "P" and block.vars != VARS_CONST:
                raise ValueError("P block must be constant")
            if name in ("Q1", "Q2", "R0") and block.vars == VARS_ST:
                raise ValueError(f"{name} block must depend on s only")
            object.__setattr__(self, name, block)

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def build(
        cls,
        P=None,
        Q1=None,
        Q2=None,
        R0=None,
        R1=None,
        R2=None,
        dims_in: Optional[Tuple[int, int]] = None,
        dims_out: Optional[Tuple[int, int]] = None,
        domain: Sequence[float] = (0.0, 1.0),
    ) -> "PIOperator":
        """
        Build an operator, inferring dimensions from the blocks provided.

        Args:
            P, Q1, Q2, R0, R1, R2: Blocks as arrays or PolyMatrix (None = zero)
            dims_in: (m1, n1), inferred when omitted
            dims_out: (m2, n2), inferred when omitted
            domain: Interval (a, b)

        Example:
            >>> volterra = PIOperator.build(R1=PolyMatrix.scalar({(0, 0): 1.0}))
        """
        def shape_of(value):
            if value is None:
                return None
            if isinstance(value, PolyMatrix):
                return value.shape
            arr = np.atleast_2d(np.asarray(value, dtype=float))
            return arr.shape

        sP, sQ1, sQ2 = shape_of(P), shape_of(Q1), shape_of(Q2)
        sR = [shape_of(v) for v in (R0, R1, R2) if v is not None]

        def pick(*candidates):
            for c in candidates:
                if c is not None:
                    return c
            return 0

        m2 = pick(sP and sP[0], sQ1 and sQ1[0])
        m1 = pick(sP and sP[1], sQ2 and sQ2[1])
        n2 = pick(sQ2 and sQ2[0], *(r[0] for r in sR))
        n1 = pick(sQ1 and sQ1[1], *(r[1] for r in sR))
        if dims_in is None:
            dims_in = (m1, n1)
        if dims_out is None:
            dims_out = (m2, n2)
        if P is not None and not isinstance(P, PolyMatrix):
            P = np.atleast_2d(np.asarray(P, dtype=float))
        return cls(tuple(dims_in), tuple(dims_out), tuple(domain), P, Q1, Q2, R0, R1, R2)

    @classmethod
    def zero(
        cls,
        dims_in: Tuple[int, int],
        dims_out: Tuple[int, int],
        domain: Sequence[float] = (0.0, 1.0),
    ) -> "PIOperator":
        """Zero operator between the given spaces."""
        return cls(dims_in, dims_out, tuple(domain), None, None, None, None, None, None)

    @classmethod
    def identity(cls, m: int, n: int, domain: Sequence[float] = (0.0, 1.0)) -> "PIOperator":
        """Identity on R^m x L2^n."""
        return cls(
            (m, n), (m, n), tuple(domain),
            np.eye(m), None, None, PolyMatrix.identity(n, domain), None, None,
        )

    @classmethod
    def matrix(cls, M, domain: Sequence[float] = (0.0, 1.0)) -> "PIOperator":
        """Pure matrix operator R^m1 -> R^m2 (n1 = n2 = 0)."""
        if isinstance(M, PolyMatrix):
            return cls((M.cols, 0), (M.rows, 0), M.domain, M, None, None, None, None, None)
        M = np.atleast_2d(np.asarray(M, dtype=float))
        return cls((M.shape[1], 0), (M.shape[0], 0), tuple(domain), M, None, None, None, None, None)

    @classmethod
    def multiplier(cls, R0: PolyMatrix) -> "PIOperator":
        """Multiplication operator f(s) -> R0(s) f(s)."""
        return cls((0, R0.cols), (0, R0.rows), R0.domain, None, None, None, R0, None, None)

    # ------------------------------------------------------------------
    # Properties
    # ------------------------------------------------------------------

    @property
    def blocks(self) -> Tuple[PolyMatrix, ...]:
        return tuple(getattr(self, name) for name in BLOCK_NAMES)

    @property
    def n_terms(self) -> int:
        return max(b.n_terms for b in self.blocks)

    @property
    def is_decision_free(self) -> bool:
        return all(b.is_decision_free for b in self.blocks)

    @property
    def degree(self) -> int:
        return max(b.degree for b in self.blocks)

    @property
    def is_matrix(self) -> bool:
        return self.dims_in[1] == 0 and self.dims_out[1] == 0

    def P_matrix(self) -> np.ndarray:
        """The P block as a plain array (decision-free operators only)."""
        value = self.P.evaluate()
        if value.ndim != 2:
            raise ValueError("P block depends on decision variables")
        return value

    def _check_same_space(self, other: "PIOperator", what: str) -> None:
        if self.domain != other.domain:
            raise ValueError(f"Domain mismatch in {what}: {self.domain} vs {other.domain}")
        if self.dims_in != other.dims_in or self.dims_out != other.dims_out:
            raise ValueError(
                f"Dimension mismatch in {what}: {self.dims_in}->{self.dims_out} "
                f"vs {other.dims_in}->{other.dims_out}"
            )

    def map_blocks(self, fn) -> "PIOperator":
        return PIOperator(
            self.dims_in, self.dims_out, self.domain,
            *(fn(b) for b in self.blocks),
        )

    # ------------------------------------------------------------------
    # Linear algebra
    # ------------------------------------------------------------------

    def __add__(self, other: "PIOperator") -> "PIOperator":
        if not isinstance(other, PIOperator):
            return NotImplemented
        self._check_same_space(other, "add")
        return PIOperator(
            self.dims_in, self.dims_out, self.domain,
            *(a + b for a, b in zip(self.blocks, other.blocks)),
        )

    def __neg__(self) -> "PIOperator":
        return self.map_blocks(lambda b: -b)

    def __sub__(self, other: "PIOperator") -> "PIOperator":
        return self + (-other)

    def scale(self, factor: float) -> "PIOperator":
        return self.map_blocks(lambda b: b.scale(factor))

    def __mul__(self, factor):
        if isinstance(factor, PIOperator):
            return NotImplemented
        return self.scale(factor)

    __rmul__ = __mul__

    def compose(self, other: "PIOperator") -> "PIOperator":
        """
        Composition self o other.

        Kernels are obtained by exact expansion; integrals over the
        intermediate variable are split at s and theta.

        Raises:
            ValueError: On dimension or domain mismatch
        """
        A, B = self, other
        if A.domain != B.domain:
            raise ValueError(f"Domain mismatch in compose: {A.domain} vs {B.domain}")
        if A.dims_in != B.dims_out:
            raise ValueError(f"Dimension mismatch in compose: {A.dims_in} vs {B.dims_out}")

        Q1a_t = _in_theta(A.Q1)
        Q1b_t = _in_theta(B.Q1)
        R0b_t = _in_theta(B.R0)

        P = A.P @ B.P + (A.Q1 @ B.Q2).integrate_s()

        Q1 = (
            A.P @ B.Q1
            + A.Q1 @ B.R0
            + _to_s(integrate_product(Q1a_t, B.R1, "theta", "b"))
            + _to_s(integrate_product(Q1a_t, B.R2, "a", "theta"))
        )

        Q2 = (
            A.Q2 @ B.P
            + A.R0 @ B.Q2
            + _to_s(integrate_product(A.R1, B.Q2, "a", "s"))
            + _to_s(integrate_product(A.R2, B.Q2, "s", "b"))
        )

        R0 = A.R0 @ B.R0

        separable = A.Q2 @ Q1b_t
        R1 = (
            separable
            + A.R0 @ B.R1
            + A.R1 @ R0b_t
            + integrate_product(A.R1, B.R1, "theta", "s")
            + integrate_product(A.R1, B.R2, "a", "theta")
            + integrate_product(A.R2, B.R1, "s", "b")
        )
        R2 = (
            separable
            + A.R0 @ B.R2
            + A.R2 @ R0b_t
            + integrate_product(A.R1, B.R2, "a", "s")
            + integrate_product(A.R2, B.R1, "theta", "b")
            + integrate_product(A.R2, B.R2, "s", "theta")
        )
        return PIOperator(B.dims_in, A.dims_out, A.domain, P, Q1, Q2, R0, R1, R2)

    def __matmul__(self, other: "PIOperator") -> "PIOperator":
        if not isinstance(other, PIOperator):
            return NotImplemented
        return self.compose(other)

    def adjoint(self) -> "PIOperator":
        """Adjoint with respect to the RL2 inner product."""
        return PIOperator(
            self.dims_out,
            self.dims_in,
            self.domain,
            self.P.transpose(),
            self.Q2.transpose(),
            self.Q1.transpose(),
            self.R0.transpose(),
            self.R2.swap_vars().transpose(),
            self.R1.swap_vars().transpose(),
        )

    @property
    def star(self) -> "PIOperator":
        return self.adjoint()

    # ------------------------------------------------------------------
    # Application
    # ------------------------------------------------------------------

    def apply(self, f: RL2Function) -> RL2Function:
        """
        Apply the operator to an RL2 function with polynomial distributed part.

        Returns:
            Exact polynomial image

        Raises:
            ValueError: On dimension mismatch or decision-dependent operators
        """
        if not self.is_decision_free:
            raise ValueError("Cannot apply a decision-dependent operator")
        if (f.m, f.n) != self.dims_in:
            raise ValueError(f"Function dims {(f.m, f.n)} do not match {self.dims_in}")
        if f.domain != self.domain:
            raise ValueError(f"Domain mismatch: {f.domain} vs {self.domain}")
        x = PolyMatrix(self.dims_in[0], 1, {(0, 0): f.finite.reshape(-1, 1)}, self.domain)
        g = f.distributed
        g_t = _in_theta(g)

        finite = self.P @ x + (self.Q1 @ g).integrate_s()
        dist = (
            self.Q2 @ x
            + self.R0 @ g
            + (self.R1 @ g_t).integrate(LOWER)
            + (self.R2 @ g_t).integrate(UPPER)
        )
        finite_values = finite.evaluate()[:, 0] if self.dims_out[0] else np.zeros(0)
        return RL2Function(finite_values, _to_s(dist))

    def apply_on_grid(
        self, f: RL2Function, n_nodes: int = DEFAULT_QUADRATURE_NODES
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Numerically apply the operator, returning values on a Gauss grid.

        Volterra integrals are evaluated from exact antiderivatives of the
        integrand in theta at each node, so high-degree operators never form
        high-degree products symbolically.

        Returns:
            Tuple (finite_out, nodes, distributed_out) with distributed_out of
            shape (len(nodes), n2)
        """
        if not self.is_decision_free:
            raise ValueError("Cannot apply a decision-dependent operator")
        nodes, weights = gauss_legendre(self.domain, n_nodes)
        a, b = self.domain
        f_vals = f.values(nodes)                                   # (q, n1)
        x = f.finite
        finite = self.P_matrix() @ x
        if self.dims_in[1]:
            Q1_vals = self.Q1.evaluate_grid(nodes)                  # (q, m2, n1)
            finite = finite + np.einsum("q,qij,qj->i", weights, Q1_vals, f_vals)
        dist = np.einsum("qij,j->qi", self.Q2.evaluate_grid(nodes), x)
        dist = dist + np.einsum("qij,qj->qi", self.R0.evaluate_grid(nodes), f_vals)
        if self.dims_in[1] and self.dims_out[1]:
            f_coef = column_coefficients(f.distributed)
            for kernel, kind in ((self.R1, LOWER), (self.R2, UPPER)):
                for (i, j), block in kernel.blocks.items():
                    moments = volterra_moments(f_coef, j, nodes, a, b, kind)   # (q, n1)
                    dist = dist + (nodes ** i)[:, None] * (moments @ block[:, :, 0].T)
        return finite, nodes, dist

    # ------------------------------------------------------------------
    # Comparison and decision handling
    # ------------------------------------------------------------------

    def max_abs_difference(self, other: "PIOperator") -> float:
        """Largest coefficient-wise difference over all six blocks."""
        self._check_same_space(other, "comparison")
        return max(a.max_abs_difference(b) for a, b in zip(self.blocks, other.blocks))

    def allclose(self, other: "PIOperator", atol: float = 1e-10) -> bool:
        return self.max_abs_difference(other) <= atol

    def __eq__(self, other) -> bool:
        if not isinstance(other, PIOperator):
            return NotImplemented
        return (
            self.dims_in == other.dims_in
            and self.dims_out == other.dims_out
            and self.domain == other.domain
            and all(a == b for a, b in zip(self.blocks, other.blocks))
        )

    __hash__ = None

    def is_self_adjoint(self, tol: float = 1e-9) -> bool:
        """Structural self-adjointness up to a relative coefficient tolerance."""
        if self.dims_in != self.dims_out:
            return False
        scale = max(
            [float(np.max(np.abs(v))) for b in self.blocks for v in b.blocks.values()] + [1.0]
        )
        return self.max_abs_difference(self.adjoint()) <= tol * scale

    def materialize(self, values: np.ndarray) -> "PIOperator":
        """Substitute numeric decision values into every block."""
        return self.map_blocks(lambda b: b.materialize(values))

    def prune(self, tol: float = 1e-13) -> "PIOperator":
        return self.map_blocks(lambda b: b.prune(tol))

    def __repr__(self) -> str:
        return (
            f"<PIOperator({self.dims_in}->{self.dims_out}, domain={self.domain}, "
            f"degree={self.degree}, terms={self.n_terms})>"
        )


# =============================================================================
# NUMERIC HELPERS
# =============================================================================

def column_coefficients(poly: PolyMatrix) -> np.ndarray:
    """Monomial coefficients of an n x 1 univariate polynomial as (n, degree+1)."""
    coef = np.zeros((poly.rows, poly.degree_s + 1))
    for (i, _), block in poly.blocks.items():
        coef[:, i] = block[:, 0, 0]
    return coef


def volterra_moments(
    f_coef: np.ndarray, power: int, nodes: np.ndarray, a: float, b: float, kind: str
) -> np.ndarray:
    """
    int theta^power f(theta) dtheta over [a, s] or [s, b] at each node s.

    Returns:
        Array of shape (len(nodes), n)
    """
    out = np.zeros((nodes.size, f_coef.shape[0]))
    for c in range(f_coef.shape[0]):
        integrand = np.polynomial.Polynomial(
            np.concatenate([np.zeros(power), f_coef[c]])
        )
        anti = integrand.integ()
        if kind == LOWER:
            out[:, c] = anti(nodes) - anti(a)
        else:
            out[:, c] = anti(b) - anti(nodes)
    return out


# =============================================================================
# MODULE-LEVEL OPERATIONS
# =============================================================================

def apply(op: PIOperator, f: RL2Function) -> RL2Function:
    """Apply a PI operator to an RL2 function."""
    return op.apply(f)


def compose(A: PIOperator, B: PIOperator) -> PIOperator:
    """Composition A o B."""
    return A.compose(B)


def add(A: PIOperator, B: PIOperator) -> PIOperator:
    return A + B


def scale(c: float, A: PIOperator) -> PIOperator:
    return A.scale(c)


def negate(A: PIOperator) -> PIOperator:
    return -A


def adjoint(A: PIOperator) -> PIOperator:
    return A.adjoint()


def vcat(A: PIOperator, B: PIOperator) -> PIOperator:
    """
    Vertical concatenation [A; B] with a shared input space.

    Finite outputs and distributed outputs are stacked separately, so the
    output space is R^(mA+mB) x L2^(nA+nB).
    """
    if A.dims_in != B.dims_in:
        raise ValueError(f"Input dims differ in vcat: {A.dims_in} vs {B.dims_in}")
    if A.domain != B.domain:
        raise ValueError(f"Domain mismatch in vcat: {A.domain} vs {B.domain}")
    dims_out = (A.dims_out[0] + B.dims_out[0], A.dims_out[1] + B.dims_out[1])
    blocks = [vstack([a, b]) for a, b in zip(A.blocks, B.blocks)]
    return PIOperator(A.dims_in, dims_out, A.domain, *blocks)


def hcat(A: PIOperator, B: PIOperator) -> PIOperator:
    """
    Horizontal concatenation [A, B] with a shared output space.

    The input space is R^(mA+mB) x L2^(nA+nB); finite and distributed inputs
    are concatenated separately.
    """
    if A.dims_out != B.dims_out:
        raise ValueError(f"Output dims differ in hcat: {A.dims_out} vs {B.dims_out}")
    if A.domain != B.domain:
        raise ValueError(f"Domain mismatch in hcat: {A.domain} vs {B.domain}")
    dims_in = (A.dims_in[0] + B.dims_in[0], A.dims_in[1] + B.dims_in[1])
    blocks = [hstack([a, b]) for a, b in zip(A.blocks, B.blocks)]
    return PIOperator(dims_in, A.dims_out, A.domain, *blocks)


def blockdiag(A: PIOperator, B: PIOperator) -> PIOperator:
    """Block-diagonal operator diag(A, B)."""
    top = hcat(A, PIOperator.zero(B.dims_in, A.dims_out, A.domain))
    bottom = hcat(PIOperator.zero(A.dims_in, B.dims_out, A.domain), B)
    return vcat(top, bottom)


def block_operator(rows: Sequence[Sequence[PIOperator]]) -> PIOperator:
    """Assemble [[A11, A12, ...], [A21, ...]] by hcat within rows, then vcat."""
    stacked = None
    for row in rows:
        line = row[0]
        for op in row[1:]:
            line = hcat(line, op)
        stacked = line if stacked is None else vcat(stacked, line)
    return stacked
