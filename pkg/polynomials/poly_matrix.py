"""
Polynomial Matrix Module
Exact-coefficient polynomial matrices in one variable s or two variables (s, theta)

Coefficients are stored in the monomial basis as a map from the exponent pair
(i, j) of s^i theta^j to a coefficient block. A block has shape
(rows, cols, n_terms): index 0 of the last axis is the constant part and index
k >= 1 is the coefficient of the (k-1)-th scalar decision variable of an LPI
program. Plain numeric polynomials have n_terms == 1.
"""

import math
import logging
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

# Setup logging
logger = logging.getLogger(__name__)

MAX_DEGREE = 24

# Variable sets, ordered so that promotion is max()
VARS_CONST = ""
VARS_S = "s"
VARS_ST = "st"
_VAR_RANK = {VARS_CONST: 0, VARS_S: 1, VARS_ST: 2}

# Integration kinds for the theta variable
LOWER = "lower"   # theta in [a, s]
UPPER = "upper"   # theta in [s, b]
FULL = "full"     # theta in [a, b]

# Limits accepted by integrate_product
LIMITS = ("a", "b", "s", "theta")

Exponent = Tuple[int, int]
Domain = Tuple[float, float]


def _as_block(value, rows: int, cols: int) -> np.ndarray:
    """Coerce a scalar/matrix/affine block to a float array of shape (rows, cols, K)."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full((rows, cols), float(arr))
    if arr.ndim == 1 and rows * cols == arr.size:
        arr = arr.reshape(rows, cols)
    if arr.ndim == 2:
        arr = arr[:, :, np.newaxis]
    if arr.ndim != 3 or arr.shape[:2] != (rows, cols):
        raise ValueError(
            f"Coefficient block of shape {arr.shape} does not match ({rows}, {cols})"
        )
    return arr


def _pad_terms(block: np.ndarray, n_terms: int) -> np.ndarray:
    """Zero-pad the affine axis of a block to n_terms."""
    if block.shape[2] == n_terms:
        return block
    padded = np.zeros(block.shape[:2] + (n_terms,))
    padded[:, :, :block.shape[2]] = block
    return padded


def _block_matmul(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """
    Matrix product of two coefficient blocks.

    At most one factor may depend on decision variables, otherwise the
    product would not be affine.
    """
    if left.shape[2] == 1:
        return np.einsum("ij,jkl->ikl", left[:, :, 0], right)
    if right.shape[2] == 1:
        return np.einsum("ijl,jk->ikl", left, right[:, :, 0])
    if not np.any(left[:, :, 1:]):
        return np.einsum("ij,jkl->ikl", left[:, :, 0], right)
    if not np.any(right[:, :, 1:]):
        return np.einsum("ijl,jk->ikl", left, right[:, :, 0])
    raise ValueError("Product of two decision-dependent polynomials is not affine")


def _affine_power(c0: float, cs: float, ct: float, k: int) -> Dict[Exponent, float]:
    """Expand (c0 + cs*s + ct*theta)^k into monomial coefficients."""
    terms: Dict[Exponent, float] = {}
    for p in range(k + 1):
        for q in range(k + 1 - p):
            r = k - p - q
            coef = (
                math.comb(k, p) * math.comb(k - p, q)
                * (c0 ** r) * (cs ** p) * (ct ** q)
            )
            if coef != 0.0:
                terms[(p, q)] = terms.get((p, q), 0.0) + coef
    return terms


class PolyMatrix:
    """
    Matrix whose entries are real polynomials in s or (s, theta) on [a, b].

    Values are immutable after construction. Zero coefficient blocks are
    pruned so that structural equality matches mathematical equality.
    """

    __slots__ = ("rows", "cols", "vars", "domain", "_coeffs", "n_terms")

    def __init__(
        self,
        rows: int,
        cols: int,
        coeffs: Optional[Mapping[Exponent, object]] = None,
        domain: Sequence[float] = (0.0, 1.0),
        vars: str = VARS_CONST,
    ):
        """
        Initialize a polynomial matrix.

        Args:
            rows: Number of rows
            cols: Number of columns
            coeffs: Map from exponent pair (i, j) of s^i theta^j to a
                coefficient matrix (or affine block with a trailing axis)
            domain: Interval (a, b) with a < b
            vars: Declared variable set ("", "s" or "st"); promoted
                automatically to cover the exponents present

        Raises:
            ValueError: On invalid domain, block shapes or degree above the cap
        """
        a, b = float(domain[0]), float(domain[1])
        if not a < b:
            raise ValueError(f"Invalid domain [{a}, {b}]: need a < b")
        if vars not in _VAR_RANK:
            raise ValueError(f"Unknown variable set '{vars}'")

        self.rows = int(rows)
        self.cols = int(cols)
        self.domain: Domain = (a, b)

        blocks: Dict[Exponent, np.ndarray] = {}
        for key, value in (coeffs or {}).items():
            i, j = int(key[0]), int(key[1])
            if i < 0 or j < 0:
                raise ValueError(f"Negative exponent {key}")
            block = _as_block(value, self.rows, self.cols)
            if (i, j) in blocks:
                n = max(blocks[(i, j)].shape[2], block.shape[2])
                block = _pad_terms(blocks[(i, j)], n) + _pad_terms(block, n)
            blocks[(i, j)] = block

        n_terms = max([blk.shape[2] for blk in blocks.values()] + [1])
        canonical = {}
        for key, block in blocks.items():
            if np.any(block):
                canonical[key] = _pad_terms(block, n_terms)
        self._coeffs = dict(sorted(canonical.items()))
        self.n_terms = n_terms

        inferred = VARS_CONST
        if any(j > 0 for _, j in self._coeffs):
            inferred = VARS_ST
        elif any(i > 0 for i, _ in self._coeffs):
            inferred = VARS_S
        self.vars = max(vars, inferred, key=_VAR_RANK.get)

        if self.degree > MAX_DEGREE:
            raise ValueError(
                f"Polynomial degree {self.degree} exceeds the cap of {MAX_DEGREE}"
            )

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def zeros(
        cls, rows: int, cols: int, domain: Sequence[float] = (0.0, 1.0), vars: str = VARS_CONST
    ) -> "PolyMatrix":
        """Zero polynomial matrix."""
        return cls(rows, cols, {}, domain, vars)

    @classmethod
    def constant(cls, matrix, domain: Sequence[float] = (0.0, 1.0), vars: str = VARS_CONST) -> "PolyMatrix":
        """Constant polynomial matrix from a 2-D array (or scalar)."""
        arr = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(arr.shape[0], arr.shape[1], {(0, 0): arr}, domain, vars)

    @classmethod
    def identity(cls, n: int, domain: Sequence[float] = (0.0, 1.0)) -> "PolyMatrix":
        """Constant n x n identity."""
        return cls(n, n, {(0, 0): np.eye(n)}, domain)

    @classmethod
    def monomial(
        cls, i: int, j: int, matrix=1.0, domain: Sequence[float] = (0.0, 1.0)
    ) -> "PolyMatrix":
        """Single monomial s^i theta^j times a coefficient matrix."""
        arr = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(arr.shape[0], arr.shape[1], {(i, j): arr}, domain)

    @classmethod
    def scalar(cls, coeffs: Mapping[Exponent, float], domain: Sequence[float] = (0.0, 1.0)) -> "PolyMatrix":
        """1 x 1 polynomial from a map of exponent pairs to scalars."""
        return cls(1, 1, {k: [[v]] for k, v in coeffs.items()}, domain)

    @classmethod
    def from_callable(
        cls, func, rows: int, cols: int, degree: int, domain: Sequence[float] = (0.0, 1.0)
    ) -> "PolyMatrix":
        """
        Least-squares polynomial fit in s of a matrix-valued function.

        Args:
            func: Map from an array of points (q,) to values (q, rows, cols)
            rows: Number of rows
            cols: Number of columns
            degree: Polynomial degree of the fit
            domain: Interval (a, b)
        """
        if degree < 0 or degree > MAX_DEGREE:
            raise ValueError(f"Fit degree must lie in [0, {MAX_DEGREE}], got {degree}")
        a, b = float(domain[0]), float(domain[1])
        count = 2 * degree + 4
        s = 0.5 * (a + b) - 0.5 * (b - a) * np.cos(np.pi * (np.arange(count) + 0.5) / count)
        values = np.asarray(func(s), dtype=float).reshape(count, rows, cols)
        coeffs: Dict[Exponent, np.ndarray] = {}
        for r in range(rows):
            for c in range(cols):
                fit = np.polynomial.Polynomial.fit(s, values[:, r, c], degree, domain=[a, b]).convert()
                for i, value in enumerate(fit.coef):
                    coeffs.setdefault((i, 0), np.zeros((rows, cols)))[r, c] = value
        return cls(rows, cols, coeffs, domain, VARS_S).prune()

    # ------------------------------------------------------------------
    # Properties
    # ------------------------------------------------------------------

    @property
    def coeffs(self) -> Dict[Exponent, np.ndarray]:
        """Coefficient map; blocks are 2-D for decision-free polynomials."""
        if self.n_terms == 1:
            return {k: v[:, :, 0].copy() for k, v in self._coeffs.items()}
        return {k: v.copy() for k, v in self._coeffs.items()}

    @property
    def blocks(self) -> Dict[Exponent, np.ndarray]:
        """Raw (rows, cols, n_terms) coefficient blocks (read-only use)."""
        return self._coeffs

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def degree(self) -> int:
        """Total degree (0 for constants and the zero polynomial)."""
        return max([i + j for i, j in self._coeffs] + [0])

    @property
    def degree_s(self) -> int:
        return max([i for i, _ in self._coeffs] + [0])

    @property
    def degree_theta(self) -> int:
        return max([j for _, j in self._coeffs] + [0])

    @property
    def is_zero(self) -> bool:
        return not self._coeffs

    @property
    def is_decision_free(self) -> bool:
        """True when no coefficient depends on a decision variable."""
        return all(not np.any(blk[:, :, 1:]) for blk in self._coeffs.values())

    # ------------------------------------------------------------------
    # Helpers
    # ------------------------------------------------------------------

    def _derive(self, coeffs: Mapping[Exponent, np.ndarray], rows=None, cols=None, vars=None) -> "PolyMatrix":
        return PolyMatrix(
            self.rows if rows is None else rows,
            self.cols if cols is None else cols,
            coeffs,
            self.domain,
            self.vars if vars is None else vars,
        )

    def _check_domain(self, other: "PolyMatrix") -> None:
        if self.domain != other.domain:
            raise ValueError(f"Domain mismatch: {self.domain} vs {other.domain}")

    def with_vars(self, vars: str) -> "PolyMatrix":
        """Promote the declared variable set."""
        return self._derive(self._coeffs, vars=max(self.vars, vars, key=_VAR_RANK.get))

    def _check_point(self, value: float, name: str) -> None:
        a, b = self.domain
        slack = 1e-12 * max(1.0, abs(a), abs(b))
        if not (a - slack <= value <= b + slack):
            raise ValueError(f"{name}={value} is outside the domain [{a}, {b}]")

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    def __add__(self, other: "PolyMatrix") -> "PolyMatrix":
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        self._check_domain(other)
        if self.shape != other.shape:
            raise ValueError(f"Dimension mismatch in add: {self.shape} vs {other.shape}")
        n = max(self.n_terms, other.n_terms)
        out = {k: _pad_terms(v, n) for k, v in self._coeffs.items()}
        for key, block in other._coeffs.items():
            block = _pad_terms(block, n)
            out[key] = out[key] + block if key in out else block
        vars = max(self.vars, other.vars, key=_VAR_RANK.get)
        return self._derive(out, vars=vars)

    def __neg__(self) -> "PolyMatrix":
        return self._derive({k: -v for k, v in self._coeffs.items()})

    def __sub__(self, other: "PolyMatrix") -> "PolyMatrix":
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self + (-other)

    def scale(self, factor: float) -> "PolyMatrix":
        """Multiply every coefficient by a real scalar."""
        return self._derive({k: float(factor) * v for k, v in self._coeffs.items()})

    def __mul__(self, factor):
        if isinstance(factor, PolyMatrix):
            return NotImplemented
        return self.scale(factor)

    __rmul__ = __mul__

    def __matmul__(self, other: "PolyMatrix") -> "PolyMatrix":
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        self._check_domain(other)
        if self.cols != other.rows:
            raise ValueError(
                f"Dimension mismatch in mul: {self.shape} @ {other.shape}"
            )
        out: Dict[Exponent, np.ndarray] = {}
        for (i1, j1), left in self._coeffs.items():
            for (i2, j2), right in other._coeffs.items():
                key = (i1 + i2, j1 + j2)
                prod = _block_matmul(left, right)
                if key in out:
                    n = max(out[key].shape[2], prod.shape[2])
                    out[key] = _pad_terms(out[key], n) + _pad_terms(prod, n)
                else:
                    out[key] = prod
        vars = max(self.vars, other.vars, key=_VAR_RANK.get)
        return self._derive(out, cols=other.cols, vars=vars)

    def transpose(self) -> "PolyMatrix":
        """Pointwise matrix transpose."""
        return self._derive(
            {k: np.transpose(v, (1, 0, 2)) for k, v in self._coeffs.items()},
            rows=self.cols,
            cols=self.rows,
        )

    @property
    def T(self) -> "PolyMatrix":
        return self.transpose()

    def swap_vars(self) -> "PolyMatrix":
        """Exchange the roles of s and theta: A(s, theta) -> A(theta, s)."""
        return self._derive({(j, i): v for (i, j), v in self._coeffs.items()}, vars=VARS_ST)

    def block(self, row_slice: slice, col_slice: slice) -> "PolyMatrix":
        """Sub-matrix selected by row and column slices."""
        rows = len(range(self.rows)[row_slice])
        cols = len(range(self.cols)[col_slice])
        return self._derive(
            {k: v[row_slice, col_slice, :] for k, v in self._coeffs.items()},
            rows=rows,
            cols=cols,
        )

    def kron_identity(self, n: int) -> "PolyMatrix":
        """Kronecker product with the n x n identity (self (x) I_n)."""
        eye = np.eye(n)
        out = {}
        for key, v in self._coeffs.items():
            out[key] = np.einsum("ijl,ab->iajbl", v, eye).reshape(
                self.rows * n, self.cols * n, v.shape[2]
            )
        return self._derive(out, rows=self.rows * n, cols=self.cols * n)

    # ------------------------------------------------------------------
    # Calculus and substitution
    # ------------------------------------------------------------------

    def integrate(self, kind: str = FULL) -> "PolyMatrix":
        """
        Integrate in theta over [a, s], [s, b] or [a, b].

        Args:
            kind: "lower" (theta in [a, s]), "upper" (theta in [s, b]) or
                "full" (theta in [a, b])

        Returns:
            PolyMatrix in s only

        Raises:
            ValueError: If the polynomial is not declared in (s, theta)
        """
        if self.vars != VARS_ST:
            raise ValueError("integrate requires a polynomial in (s, theta)")
        if kind not in (LOWER, UPPER, FULL):
            raise ValueError(f"Unknown integration kind '{kind}'")
        a, b = self.domain
        out: Dict[Exponent, np.ndarray] = {}

        def acc(key, block):
            out[key] = out[key] + block if key in out else block

        for (i, j), v in self._coeffs.items():
            p = j + 1
            if kind == LOWER:
                acc((i + p, 0), v / p)
                acc((i, 0), -(a ** p) / p * v)
            elif kind == UPPER:
                acc((i, 0), (b ** p) / p * v)
                acc((i + p, 0), -v / p)
            else:
                acc((i, 0), (b ** p - a ** p) / p * v)
        return self._derive(out, vars=VARS_S)

    def integrate_s(self) -> "PolyMatrix":
        """Definite integral over s in [a, b] of a polynomial in s."""
        if self.vars == VARS_ST:
            raise ValueError("integrate_s requires a polynomial in s only")
        a, b = self.domain
        total = np.zeros((self.rows, self.cols, self.n_terms))
        for (i, _), v in self._coeffs.items():
            total = total + (b ** (i + 1) - a ** (i + 1)) / (i + 1) * v
        return self._derive({(0, 0): total}, vars=VARS_CONST)

    def substitute(self, binding: Mapping[str, Tuple[float, float, float]]) -> "PolyMatrix":
        """
        Substitute affine expressions c0 + cs*s + ct*theta for the variables.

        Args:
            binding: Map from "s" and/or "theta" to (c0, cs, ct)

        Returns:
            Substituted PolyMatrix

        Example:
            >>> p.substitute({"theta": (0.0, 1.0, 0.0)})   # theta -> s
            >>> p.substitute({"s": (0.0, 0.0, 1.0)})       # s -> theta
        """
        for var in binding:
            if var not in ("s", "theta"):
                raise ValueError(f"Unknown variable '{var}'")
        s_map = binding.get("s", (0.0, 1.0, 0.0))
        t_map = binding.get("theta", (0.0, 0.0, 1.0))
        out: Dict[Exponent, np.ndarray] = {}
        for (i, j), v in self._coeffs.items():
            s_terms = _affine_power(*s_map, i)
            t_terms = _affine_power(*t_map, j)
            for (p1, q1), c1 in s_terms.items():
                for (p2, q2), c2 in t_terms.items():
                    key = (p1 + p2, q1 + q2)
                    out[key] = out[key] + c1 * c2 * v if key in out else c1 * c2 * v
        # theta stays declared unless it was substituted away
        vars = VARS_ST if self.vars == VARS_ST and "theta" not in binding else VARS_CONST
        return PolyMatrix(self.rows, self.cols, out, self.domain, vars)

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def evaluate(self, s: float = None, theta: float = None) -> np.ndarray:
        """
        Evaluate at a point of the domain.

        Returns:
            (rows, cols) array, or (rows, cols, n_terms) if decision-dependent

        Raises:
            ValueError: If a required coordinate is missing or outside [a, b]
        """
        if self.vars in (VARS_S, VARS_ST) and s is None:
            raise ValueError("evaluate requires s")
        if self.vars == VARS_ST and theta is None:
            raise ValueError("evaluate requires theta")
        if s is not None:
            self._check_point(s, "s")
        if theta is not None:
            self._check_point(theta, "theta")
        s_val = 0.0 if s is None else float(s)
        t_val = 0.0 if theta is None else float(theta)
        total = np.zeros((self.rows, self.cols, self.n_terms))
        for (i, j), v in self._coeffs.items():
            total = total + (s_val ** i) * (t_val ** j) * v
        return total[:, :, 0] if self.n_terms == 1 else total

    def evaluate_grid(self, s: np.ndarray, theta: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Vectorized evaluation of a decision-free polynomial.

        Args:
            s: 1-D array of s values
            theta: 1-D array of theta values (same length), if bivariate

        Returns:
            Array of shape (len(s), rows, cols)
        """
        if not self.is_decision_free:
            raise ValueError("evaluate_grid requires a decision-free polynomial")
        s = np.asarray(s, dtype=float)
        theta = np.zeros_like(s) if theta is None else np.asarray(theta, dtype=float)
        total = np.zeros((s.size, self.rows, self.cols))
        for (i, j), v in self._coeffs.items():
            total += np.multiply.outer((s ** i) * (theta ** j), v[:, :, 0])
        return total

    def materialize(self, values: np.ndarray) -> "PolyMatrix":
        """Substitute numeric values for the decision variables."""
        values = np.asarray(values, dtype=float)
        out = {}
        for key, v in self._coeffs.items():
            k = v.shape[2] - 1
            out[key] = v[:, :, 0] + (v[:, :, 1:] @ values[:k] if k else 0.0)
        return self._derive(out)

    def prune(self, tol: float = 1e-13) -> "PolyMatrix":
        """Drop coefficient entries with magnitude at most tol."""
        out = {k: np.where(np.abs(v) > tol, v, 0.0) for k, v in self._coeffs.items()}
        return self._derive(out)

    # ------------------------------------------------------------------
    # Comparison and serialization
    # ------------------------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        if self.shape != other.shape or self.domain != other.domain:
            return False
        if set(self._coeffs) != set(other._coeffs):
            return False
        n = max(self.n_terms, other.n_terms)
        return all(
            np.array_equal(_pad_terms(v, n), _pad_terms(other._coeffs[k], n))
            for k, v in self._coeffs.items()
        )

    __hash__ = None

    def max_abs_difference(self, other: "PolyMatrix") -> float:
        """Largest coefficient-wise absolute difference."""
        diff = self - other
        return max([float(np.max(np.abs(v))) for v in diff._coeffs.values()] + [0.0])

    def allclose(self, other: "PolyMatrix", atol: float = 1e-10) -> bool:
        return self.shape == other.shape and self.max_abs_difference(other) <= atol

    def to_dict(self) -> Dict:
        """Serialize a decision-free polynomial to plain Python types."""
        if not self.is_decision_free:
            raise ValueError("Only decision-free polynomials can be serialized")
        return {
            "rows": self.rows,
            "cols": self.cols,
            "vars": self.vars,
            "domain": list(self.domain),
            "coeffs": {f"{i},{j}": v[:, :, 0].tolist() for (i, j), v in self._coeffs.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PolyMatrix":
        """Inverse of to_dict."""
        rows, cols = int(data["rows"]), int(data["cols"])
        coeffs = {}
        for key, value in data["coeffs"].items():
            i, j = (int(x) for x in key.split(","))
            coeffs[(i, j)] = np.asarray(value, dtype=float).reshape(rows, cols)
        return cls(rows, cols, coeffs, tuple(data["domain"]), data.get("vars", VARS_CONST))

    def __repr__(self) -> str:
        return (
            f"<PolyMatrix({self.rows}x{self.cols}, vars='{self.vars}', "
            f"degree={self.degree}, terms={len(self._coeffs)}, domain={self.domain})>"
        )


# =============================================================================
# MODULE-LEVEL OPERATIONS
# =============================================================================

def add(A: PolyMatrix, B: PolyMatrix) -> PolyMatrix:
    """Coefficient-wise sum in canonical form."""
    return A + B


def mul(A: PolyMatrix, B: PolyMatrix) -> PolyMatrix:
    """Polynomial matrix product A @ B."""
    return A @ B


def integrate(A: PolyMatrix, kind: str = FULL) -> PolyMatrix:
    """Definite theta-integral over [a, s], [s, b] or [a, b]."""
    return A.integrate(kind)


def substitute(A: PolyMatrix, binding: Mapping[str, Tuple[float, float, float]]) -> PolyMatrix:
    """Affine variable substitution."""
    return A.substitute(binding)


def evaluate(A: PolyMatrix, s: float = None, theta: float = None) -> np.ndarray:
    """Point evaluation inside the domain."""
    return A.evaluate(s, theta)


def transpose(A: PolyMatrix) -> PolyMatrix:
    """Pointwise matrix transpose."""
    return A.transpose()


def _stack(parts: Sequence[PolyMatrix], axis: int, domain: Optional[Sequence[float]]) -> PolyMatrix:
    parts = list(parts)
    if not parts:
        raise ValueError("Nothing to stack")
    dom = parts[0].domain if domain is None else tuple(float(x) for x in domain)
    for p in parts:
        if p.domain != dom:
            raise ValueError(f"Domain mismatch: {p.domain} vs {dom}")
    fixed = [p.cols for p in parts] if axis == 0 else [p.rows for p in parts]
    if len(set(fixed)) > 1:
        raise ValueError(f"Dimension mismatch while stacking: {fixed}")
    n_terms = max(p.n_terms for p in parts)
    keys = set().union(*(p.blocks.keys() for p in parts))
    out = {}
    for key in keys:
        pieces = []
        for p in parts:
            blk = p.blocks.get(key)
            if blk is None:
                blk = np.zeros((p.rows, p.cols, n_terms))
            pieces.append(_pad_terms(blk, n_terms))
        out[key] = np.concatenate(pieces, axis=axis)
    rows = sum(p.rows for p in parts) if axis == 0 else parts[0].rows
    cols = parts[0].cols if axis == 0 else sum(p.cols for p in parts)
    vars = max((p.vars for p in parts), key=_VAR_RANK.get)
    return PolyMatrix(rows, cols, out, dom, vars)


def vstack(parts: Sequence[PolyMatrix], domain: Optional[Sequence[float]] = None) -> PolyMatrix:
    """Stack polynomial matrices vertically."""
    return _stack(parts, 0, domain)


def hstack(parts: Sequence[PolyMatrix], domain: Optional[Sequence[float]] = None) -> PolyMatrix:
    """Stack polynomial matrices horizontally."""
    return _stack(parts, 1, domain)


def integrate_product(
    A: PolyMatrix,
    B: PolyMatrix,
    lower: str,
    upper: str,
) -> PolyMatrix:
    """
    Integral over an intermediate variable t of A(s, t) @ B(t, theta).

    A is read with exponents (i, j) of s^i t^j and B with exponents (k, l)
    of t^k theta^l. The limits are taken from {"a", "b", "s", "theta"}.

    Args:
        A: Left kernel in (s, t)
        B: Right kernel in (t, theta)
        lower: Lower limit of t
        upper: Upper limit of t

    Returns:
        PolyMatrix in (s, theta)

    Example:
        >>> one = PolyMatrix.scalar({(0, 0): 1.0})
        >>> integrate_product(one, one, "theta", "s")   # s - theta
    """
    if lower not in LIMITS or upper not in LIMITS:
        raise ValueError(f"Limits must be among {LIMITS}, got ({lower}, {upper})")
    if A.domain != B.domain:
        raise ValueError(f"Domain mismatch: {A.domain} vs {B.domain}")
    if A.cols != B.rows:
        raise ValueError(f"Dimension mismatch in integrate_product: {A.shape} @ {B.shape}")
    a, b = A.domain
    out: Dict[Exponent, np.ndarray] = {}

    def acc(key, block):
        if key in out:
            n = max(out[key].shape[2], block.shape[2])
            out[key] = _pad_terms(out[key], n) + _pad_terms(block, n)
        else:
            out[key] = block

    def limit_term(limit: str, i: int, l: int, p: int, sign: float, block: np.ndarray):
        if limit == "a":
            acc((i, l), sign * (a ** p) / p * block)
        elif limit == "b":
            acc((i, l), sign * (b ** p) / p * block)
        elif limit == "s":
            acc((i + p, l), sign / p * block)
        else:
            acc((i, l + p), sign / p * block)

    for (i, j), left in A.blocks.items():
        for (k, l), right in B.blocks.items():
            prod = _block_matmul(left, right)
            p = j + k + 1
            limit_term(upper, i, l, p, 1.0, prod)
            limit_term(lower, i, l, p, -1.0, prod)
    return PolyMatrix(A.rows, B.cols, out, A.domain, VARS_ST)
