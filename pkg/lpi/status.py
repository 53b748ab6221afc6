"""
Solver Status
Status codes and errors surfaced by LPI solves
"""

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_ERROR = "numerical_error"

STATUSES = (OPTIMAL, INFEASIBLE, UNBOUNDED, NUMERICAL_ERROR)


class SolverError(Exception):
    """Base class for failed LPI solves."""

    status = NUMERICAL_ERROR

    def __init__(self, message: str, solver: str = ""):
        super().__init__(message)
        self.solver = solver


class InfeasibleError(SolverError):
    status = INFEASIBLE


class UnboundedError(SolverError):
    status = UNBOUNDED


class NumericalSolverError(SolverError):
    status = NUMERICAL_ERROR


_ERRORS = {
    INFEASIBLE: InfeasibleError,
    UNBOUNDED: UnboundedError,
    NUMERICAL_ERROR: NumericalSolverError,
}


def raise_for_status(status: str, solver: str = "", context: str = "") -> None:
    """
    Raise the error matching a non-optimal status.

    Raises:
        InfeasibleError, UnboundedError, NumericalSolverError
    """
    if status == OPTIMAL:
        return
    error = _ERRORS.get(status, NumericalSolverError)
    where = f" ({context})" if context else ""
    raise error(f"Solver {solver or '?'} returned status '{status}'{where}", solver)
