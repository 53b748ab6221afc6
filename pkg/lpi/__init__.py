"""
LPI package
Linear PI inequality programs, their SDP lowering and solver backends
"""

from lpi.status import (
    OPTIMAL,
    INFEASIBLE,
    UNBOUNDED,
    NUMERICAL_ERROR,
    SolverError,
    InfeasibleError,
    UnboundedError,
    NumericalSolverError,
)
from lpi.sdp import SDPInstance, SDPAProblem, write_sdpa, read_sdpa
from lpi.backends import CvxpyBackend, SDPAFileBackend, get_backend, solve_sdpa_problem
from lpi.program import LPIProgram, Assignment
from lpi.positive import positive_basis, positive_operator

__all__ = [
    "OPTIMAL",
    "INFEASIBLE",
    "UNBOUNDED",
    "NUMERICAL_ERROR",
    "SolverError",
    "InfeasibleError",
    "UnboundedError",
    "NumericalSolverError",
    "SDPInstance",
    "SDPAProblem",
    "write_sdpa",
    "read_sdpa",
    "CvxpyBackend",
    "SDPAFileBackend",
    "get_backend",
    "solve_sdpa_problem",
    "LPIProgram",
    "Assignment",
    "positive_basis",
    "positive_operator",
]
