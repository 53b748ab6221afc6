"""
LPI Program Module
Declares PI-operator and matrix decision variables, lowers operator
inequalities to coefficient-matching equalities with positive slacks, and
compiles the result to a standard-form SDP
"""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union
import logging
import math

import numpy as np
from scipy import sparse

from polynomials.poly_matrix import PolyMatrix, MAX_DEGREE
from operators.pi_operator import PIOperator
from lpi.positive import basis_size, monomials_1d, monomials_2d, positive_operator_from_index
from lpi.backends import CvxpyBackend
from lpi.sdp import SDPInstance
from lpi.status import OPTIMAL, raise_for_status

# Setup logging
logger = logging.getLogger(__name__)

ROW_TOL = 1e-12

Expression = Union[PolyMatrix, PIOperator]


@dataclass
class Variable:
    """Bookkeeping for a declared decision object."""

    name: str
    kind: str                   # "scalar", "matrix", "psd", "pi"
    indices: np.ndarray         # variable indices (-1 marks structural zeros)
    shape: Tuple[int, ...]


@dataclass
class _Rows:
    """Sparse affine rows: const + coef . y (op) 0."""

    cols: List[np.ndarray] = field(default_factory=list)
    vals: List[np.ndarray] = field(default_factory=list)
    const: List[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.const)

    def append(self, row: np.ndarray) -> None:
        nz = np.flatnonzero(row[1:])
        self.cols.append(nz)
        self.vals.append(row[1:][nz])
        self.const.append(float(row[0]))

    def matrix(self, n_vars: int) -> sparse.csr_matrix:
        if not self.const:
            return sparse.csr_matrix((0, n_vars))
        indptr = np.cumsum([0] + [c.size for c in self.cols])
        return sparse.csr_matrix(
            (np.concatenate(self.vals), np.concatenate(self.cols), indptr),
            shape=(len(self.const), n_vars),
        )


class LPIProgram:
    """
    Linear PI inequality program.

    Decision objects are scalars, matrices, positive PI operators (Z* M Z
    with M PSD) and free PI operators. Each is returned as an expression
    (PolyMatrix or PIOperator) whose coefficients are affine in the program's
    scalar variables, so ordinary operator algebra builds constraints.

    Example:
        >>> prog = LPIProgram()
        >>> g = prog.decl_scalar("gamma")
        >>> prog.constrain_geq(g, 5.0)
        >>> prog.minimize(g)
        >>> prog.solve().scalar("gamma")
    """

    def __init__(self, domain: Sequence[float] = (0.0, 1.0), name: str = "lpi"):
        self.domain = (float(domain[0]), float(domain[1]))
        self.name = name
        self.n_vars = 0
        self.variables: Dict[str, Variable] = {}
        self.psd_blocks: List[np.ndarray] = []
        self.equalities = _Rows()
        self.inequalities = _Rows()
        self.objective = np.zeros(1)
        self._slack_count = 0

    # ------------------------------------------------------------------
    # Variable declarations
    # ------------------------------------------------------------------

    def _new_indices(self, count: int) -> np.ndarray:
        idx = np.arange(self.n_vars, self.n_vars + count)
        self.n_vars += count
        return idx

    def _register(self, name: str, kind: str, indices: np.ndarray, shape: Tuple[int, ...]) -> None:
        if name in self.variables:
            raise ValueError(f"Variable '{name}' already declared")
        self.variables[name] = Variable(name, kind, indices, shape)

    def _unit_matrix(self, index_map: np.ndarray) -> np.ndarray:
        """(rows, cols, 1 + n_vars) block with a unit coefficient at each mapped variable."""
        rows, cols = index_map.shape
        block = np.zeros((rows, cols, 1 + self.n_vars))
        r, c = np.nonzero(index_map >= 0)
        block[r, c, 1 + index_map[r, c]] = 1.0
        return block

    def _symmetric_map(self, q: int) -> np.ndarray:
        index = np.full((q, q), -1, dtype=int)
        rows, cols = np.triu_indices(q)
        idx = self._new_indices(rows.size)
        index[rows, cols] = idx
        index[cols, rows] = idx
        return index

    def decl_scalar(self, name: str) -> PolyMatrix:
        """Scalar decision variable as a 1 x 1 constant polynomial."""
        idx = self._new_indices(1)
        self._register(name, "scalar", idx, ())
        return PolyMatrix(1, 1, {(0, 0): self._unit_matrix(idx.reshape(1, 1))}, self.domain)

    def decl_matrix_var(self, name: str, rows: int, cols: int = None, symmetric: bool = False, psd: bool = False) -> PolyMatrix:
        """
        Matrix decision variable.

        Args:
            name: Unique name
            rows, cols: Shape (cols defaults to rows)
            symmetric: Share variables across the diagonal
            psd: Constrain to the PSD cone (implies symmetric)
        """
        cols = rows if cols is None else cols
        if psd or symmetric:
            if rows != cols:
                raise ValueError("Symmetric matrix variables must be square")
            index = self._symmetric_map(rows)
            if psd:
                self.psd_blocks.append(index)
        else:
            index = self._new_indices(rows * cols).reshape(rows, cols)
        self._register(name, "psd" if psd else "matrix", index, (rows, cols))
        if rows == 0 or cols == 0:
            return PolyMatrix.zeros(rows, cols, self.domain)
        return PolyMatrix(rows, cols, {(0, 0): self._unit_matrix(index)}, self.domain)

    def decl_pos_pi_var(
        self,
        name: str,
        dims: Tuple[int, int],
        degree: int = 2,
        eps: float = 0.0,
    ) -> PIOperator:
        """
        Positive PI operator eps*I + Z* M Z with M a fresh PSD matrix.

        Raises:
            ValueError: If the parameterization would exceed the degree cap
        """
        m, n = dims
        if n and 2 * degree + 1 > MAX_DEGREE:
            raise ValueError(f"Positive variable degree {degree} exceeds the polynomial cap")
        q = basis_size(m, n, degree)
        index = self._symmetric_map(q)
        self.psd_blocks.append(index)
        self._register(f"{name}.M", "psd", index, (q, q))
        self._register(name, "pi", index, (m, n))
        P = positive_operator_from_index(index, 1 + self.n_vars, m, n, degree, self.domain)
        if eps:
            P = P + PIOperator.identity(m, n, self.domain).scale(eps)
        logger.debug(f"Positive variable {name}: dims {dims}, degree {degree}, M {q}x{q}")
        return P

    def decl_free_pi_var(
        self,
        name: str,
        dims_in: Tuple[int, int],
        dims_out: Tuple[int, int],
        degrees: Mapping[str, int],
    ) -> PIOperator:
        """
        PI operator whose listed blocks carry free polynomial coefficients.

        Args:
            name: Unique name
            dims_in, dims_out: Operator dimensions
            degrees: Map from block name (P, Q1, Q2, R0, R1, R2) to kernel
                degree; blocks not listed are zero

        Example:
            >>> Z = prog.decl_free_pi_var("Z", (1, 0), (0, 1), {"P": 0, "Q2": 4})
        """
        (m1, n1), (m2, n2) = dims_in, dims_out
        shapes = {
            "P": (m2, m1), "Q1": (m2, n1), "Q2": (n2, m1),
            "R0": (n2, n1), "R1": (n2, n1), "R2": (n2, n1),
        }
        blocks = {}
        used: List[np.ndarray] = []
        for block_name, degree in degrees.items():
            if block_name not in shapes:
                raise ValueError(f"Unknown block '{block_name}'")
            rows, cols = shapes[block_name]
            if rows == 0 or cols == 0:
                continue
            if block_name == "P":
                exponents = [(0, 0)]
            elif block_name in ("R1", "R2"):
                exponents = monomials_2d(degree)
            else:
                exponents = monomials_1d(degree)
            coeffs = {}
            for key in exponents:
                index = self._new_indices(rows * cols).reshape(rows, cols)
                used.append(index.reshape(-1))
                coeffs[key] = index
            blocks[block_name] = PolyMatrix(
                rows, cols, {k: self._unit_matrix(v) for k, v in coeffs.items()}, self.domain,
                "st" if block_name in ("R1", "R2") else ("" if block_name == "P" else "s"),
            )
        indices = np.concatenate(used) if used else np.zeros(0, dtype=int)
        self._register(name, "pi", indices, (m1, n1, m2, n2))
        return PIOperator.build(dims_in=dims_in, dims_out=dims_out, domain=self.domain, **blocks)

    # ------------------------------------------------------------------
    # Constraints
    # ------------------------------------------------------------------

    def _add_rows(self, target: _Rows, block: np.ndarray) -> int:
        """Append every entry of a (rows, cols, terms) block as an affine row."""
        added = 0
        flat = block.reshape(-1, block.shape[2])
        scale = max(float(np.max(np.abs(flat))) if flat.size else 0.0, 1.0)
        for row in flat:
            if np.max(np.abs(row[1:]), initial=0.0) <= ROW_TOL * scale:
                if abs(row[0]) <= 1e-9 * scale:
                    continue
                logger.warning(f"Constant row with residual {row[0]:.3e} makes the program infeasible")
            target.append(row)
            added += 1
        return added

    def constrain_eq(self, lhs: Expression, rhs: Expression, symmetric: bool = False) -> int:
        """
        Equate two expressions coefficient by coefficient.

        Args:
            lhs, rhs: PolyMatrix or PIOperator expressions of equal shape
            symmetric: Both sides are self-adjoint; only the independent
                coefficients (upper P, Q1, upper R0, R1) are matched

        Returns:
            Number of scalar equalities added
        """
        diff = lhs - rhs
        added = 0
        if isinstance(diff, PolyMatrix):
            for block in diff.blocks.values():
                if symmetric:
                    iu = np.triu_indices(diff.rows)
                    block = block[iu][:, None, :]
                added += self._add_rows(self.equalities, block)
            return added
        names = ("P", "Q1", "R0", "R1") if symmetric else ("P", "Q1", "Q2", "R0", "R1", "R2")
        for block_name in names:
            poly = getattr(diff, block_name)
            for block in poly.blocks.values():
                if symmetric and block_name in ("P", "R0"):
                    iu = np.triu_indices(poly.rows)
                    block = block[iu][:, None, :]
                added += self._add_rows(self.equalities, block)
        logger.debug(f"constrain_eq added {added} equalities")
        return added

    def slack_degree(self, expr: PIOperator) -> int:
        """Smallest positive-variable degree whose kernels reach the expression's degree."""
        return max(1, math.ceil(expr.degree / 2))

    def constrain_psd(
        self, expr: Expression, eps: float = 0.0, degree: Optional[int] = None
    ) -> PIOperator:
        """
        Enforce expr >= eps I through expr - eps I = Q with Q positive.

        Args:
            expr: Self-adjoint operator (or symmetric matrix) expression
            eps: Margin
            degree: Slack degree (chosen from the expression when None)

        Returns:
            The slack operator

        Raises:
            ValueError: If expr is not self-adjoint
        """
        if isinstance(expr, PolyMatrix):
            expr = PIOperator.matrix(expr)
        if not expr.is_self_adjoint(tol=1e-8):
            raise ValueError("constrain_psd requires a self-adjoint expression")
        m, n = expr.dims_in
        degree = self.slack_degree(expr) if degree is None else degree
        self._slack_count += 1
        slack = self.decl_pos_pi_var(f"_slack{self._slack_count}", (m, n), degree if n else 0)
        shifted = expr - PIOperator.identity(m, n, self.domain).scale(eps) if eps else expr
        added = self.constrain_eq(shifted, slack, symmetric=True)
        logger.info(
            f"Operator inequality on R^{m} x L2^{n}: slack degree {degree if n else 0}, "
            f"{added} equalities"
        )
        return slack

    def constrain_nsd(self, expr: Expression, eps: float = 0.0, degree: Optional[int] = None) -> PIOperator:
        """Enforce expr <= -eps I."""
        return self.constrain_psd(-expr, eps, degree)

    def constrain_geq(self, expr: PolyMatrix, rhs: Union[float, np.ndarray] = 0.0) -> int:
        """Entrywise scalar inequalities expr >= rhs."""
        rhs_poly = PolyMatrix.constant(np.broadcast_to(np.asarray(rhs, dtype=float), expr.shape), self.domain)
        diff = expr - rhs_poly
        block = diff.blocks.get((0, 0))
        if block is None:
            block = np.zeros(expr.shape + (1,))
        return self._add_rows(self.inequalities, block)

    def constrain_leq(self, expr: PolyMatrix, rhs: Union[float, np.ndarray] = 0.0) -> int:
        """Entrywise scalar inequalities expr <= rhs."""
        return self.constrain_geq(-expr, -np.asarray(rhs, dtype=float))

    def minimize(self, expr: PolyMatrix) -> None:
        """Set a scalar affine objective."""
        if expr.shape != (1, 1) or expr.vars:
            raise ValueError("Objective must be a constant 1 x 1 expression")
        block = expr.blocks.get((0, 0))
        self.objective = np.zeros(1) if block is None else block[0, 0, :].copy()

    # ------------------------------------------------------------------
    # Compilation and solving
    # ------------------------------------------------------------------

    def compile(self) -> SDPInstance:
        """Lower the program to a standard-form SDP."""
        K = self.n_vars
        c = np.zeros(K)
        c[:self.objective.size - 1] = self.objective[1:]
        A = self.equalities.matrix(K)
        G = self.inequalities.matrix(K)
        instance = SDPInstance(
            n_vars=K,
            c=c,
            c0=float(self.objective[0]),
            A=A,
            b=-np.asarray(self.equalities.const, dtype=float),
            G=G,
            h=-np.asarray(self.inequalities.const, dtype=float),
            psd_blocks=list(self.psd_blocks),
            names={name: var.indices for name, var in self.variables.items()},
        )
        logger.info(f"Compiled {self.name}: {instance.summary()}")
        return instance

    def solve(self, backend=None) -> "Assignment":
        """
        Compile and solve.

        Args:
            backend: SolverBackend (embedded cvxpy backend when None)

        Returns:
            Assignment carrying status, objective and variable values
        """
        backend = backend or CvxpyBackend()
        instance = self.compile()
        result = backend.solve(instance)
        return Assignment(
            program=self,
            status=result.status,
            y=result.y,
            objective=result.objective,
            solver=result.solver,
            inaccurate=result.inaccurate,
            residuals=instance.residuals(result.y) if result.y is not None else {},
        )


@dataclass
class Assignment:
    """Solved values of an LPI program."""

    program: LPIProgram
    status: str
    y: Optional[np.ndarray]
    objective: float
    solver: str = ""
    inaccurate: bool = False
    residuals: Dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL and self.y is not None

    def raise_for_status(self, context: str = "") -> "Assignment":
        raise_for_status(self.status, self.solver, context or self.program.name)
        return self

    def _values(self) -> np.ndarray:
        if self.y is None:
            raise ValueError(f"No solution available (status '{self.status}')")
        return self.y

    def value(self, expr: Expression):
        """
        Materialize an expression at the solution.

        Returns:
            ndarray for constant PolyMatrix expressions, PolyMatrix for
            polynomial ones, PIOperator for operators
        """
        y = self._values()
        if isinstance(expr, PIOperator):
            return expr.materialize(y)
        poly = expr.materialize(y)
        return poly.evaluate() if not poly.vars else poly

    def scalar(self, name: str) -> float:
        var = self.program.variables[name]
        return float(self._values()[var.indices[0]])

    def matrix(self, name: str) -> np.ndarray:
        var = self.program.variables[name]
        y = self._values()
        out = np.zeros(var.indices.shape)
        mask = var.indices >= 0
        out[mask] = y[var.indices[mask]]
        return out
