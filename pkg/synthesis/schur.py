"""
Schur Complement Check
Numerical comparison of block-operator positivity with positivity of the
Schur complement, used as a test utility and as a diagnostic on certificates
"""

from dataclasses import dataclass
import logging
import math

from operators.inversion import InversionError, invert_pi_with_residual
from operators.pi_operator import PIOperator, block_operator
from synthesis.certificates import projected_spectrum

# Setup logging
logger = logging.getLogger(__name__)

DEFAULT_PROBE_DEGREE = 8


@dataclass(frozen=True)
class SchurReport:
    """
    Smallest projected eigenvalues of the block operator [P, Q*; Q, R], of P
    and of the complement R - Q P^-1 Q*, with the conclusions drawn at eps.

    Block positivity at eps carries over to the complement at the same eps.
    The converse only guarantees the block margin
    eps / (1 + |Q| / P_min)^2, reported as implied_block_margin.
    """

    eps: float
    block_min: float
    P_min: float
    complement_min: float
    inversion_residual: float
    conclusive: bool
    Q_norm: float = 0.0

    @property
    def block_holds(self) -> bool:
        return self.block_min > self.eps

    @property
    def complement_holds(self) -> bool:
        return self.P_min > self.eps and self.complement_min > self.eps

    @property
    def implied_block_margin(self) -> float:
        if not self.complement_holds:
            return math.nan
        return self.eps / (1.0 + self.Q_norm / self.P_min) ** 2

    @property
    def consistent(self) -> bool:
        """Each side's verdict is compatible with what it implies for the other."""
        if self.block_holds and not self.complement_holds:
            return False
        if self.complement_holds and not self.block_min > self.implied_block_margin:
            return False
        return True


def _minimum(op: PIOperator, degree: int) -> float:
    eigs = projected_spectrum(op, degree)
    return float(eigs[0]) if eigs.size else math.inf


def _norm(op: PIOperator, degree: int) -> float:
    eigs = projected_spectrum(op.adjoint() @ op, degree)
    return math.sqrt(max(float(eigs[-1]), 0.0)) if eigs.size else 0.0


def schur_consistency_check(
    P: PIOperator,
    Q: PIOperator,
    R: PIOperator,
    eps: float = 1e-6,
    probe_degree: int = DEFAULT_PROBE_DEGREE,
    inversion_tol: float = 1e-4,
) -> SchurReport:
    """
    Check [P, Q*; Q, R] > eps I against (P > eps I and R - Q P^-1 Q* > eps I).

    Args:
        P, Q, R: Decision-free operators, P and R self-adjoint, Q mapping the
            space of P into the space of R
        eps: Margin
        probe_degree: Legendre degree of the projection basis
        inversion_tol: Residual above which the complement is inconclusive

    Returns:
        SchurReport

    Raises:
        ValueError: On dimension mismatch
    """
    if P.dims_in != P.dims_out or R.dims_in != R.dims_out:
        raise ValueError("P and R must be square")
    if Q.dims_in != P.dims_in or Q.dims_out != R.dims_in:
        raise ValueError(f"Q maps {Q.dims_in}->{Q.dims_out}, expected {P.dims_in}->{R.dims_in}")

    block = block_operator([[P, Q.adjoint()], [Q, R]])
    block_min = _minimum(block, probe_degree)
    P_min = _minimum(P, probe_degree)

    complement_min = -math.inf
    residual = math.nan
    conclusive = True
    if P_min > eps:
        try:
            inverse = invert_pi_with_residual(P, tol=inversion_tol, strict=False)
        except InversionError as e:
            logger.warning(f"Schur check: inversion failed ({e})")
            conclusive = False
        else:
            residual = inverse.residual
            conclusive = residual <= inversion_tol
            complement = R - Q @ (inverse.operator @ Q.adjoint())
            complement_min = _minimum(complement, probe_degree)

    report = SchurReport(eps, block_min, P_min, complement_min, residual, conclusive, _norm(Q, probe_degree))
    logger.info(
        f"Schur check: block {block_min:.3e}, P {P_min:.3e}, complement {complement_min:.3e}, "
        f"consistent={report.consistent}"
    )
    return report
