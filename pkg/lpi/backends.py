"""
Solver Backends
Conic solvers for compiled LPI programs
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union
import logging
import time

import cvxpy as cp
from cvxpy.error import SolverError as CvxpySolverError
import numpy as np
from scipy import sparse

from lpi.sdp import SDPAProblem, SDPInstance, write_sdpa
from lpi.status import INFEASIBLE, NUMERICAL_ERROR, OPTIMAL, UNBOUNDED

# Setup logging
logger = logging.getLogger(__name__)

DEFAULT_SOLVERS = ("CLARABEL", "SCS")

_STATUS_MAP = {
    cp.OPTIMAL: OPTIMAL,
    cp.OPTIMAL_INACCURATE: OPTIMAL,
    cp.INFEASIBLE: INFEASIBLE,
    cp.INFEASIBLE_INACCURATE: INFEASIBLE,
    cp.UNBOUNDED: UNBOUNDED,
    cp.UNBOUNDED_INACCURATE: UNBOUNDED,
}


@dataclass
class SolveResult:
    """Raw outcome of a backend solve."""

    status: str
    y: Optional[np.ndarray]
    objective: float
    solver: str
    inaccurate: bool = False
    solve_time: float = 0.0
    info: Dict = field(default_factory=dict)


class SolverBackend:
    """Interface: solve an SDPInstance and return a SolveResult."""

    name = "abstract"

    def solve(self, instance: SDPInstance) -> SolveResult:
        raise NotImplementedError


def _solver_order(preferred: Union[str, Sequence[str], None]) -> List[str]:
    if preferred is None:
        order = list(DEFAULT_SOLVERS)
    elif isinstance(preferred, str):
        order = [preferred.upper()] + [s for s in DEFAULT_SOLVERS if s != preferred.upper()]
    else:
        order = [s.upper() for s in preferred]
    installed = set(cp.installed_solvers())
    available = [s for s in order if s in installed]
    if not available:
        raise RuntimeError(f"None of the solvers {order} is installed (have {sorted(installed)})")
    return available


def _run(problem: cp.Problem, solvers: List[str], verbose: bool) -> str:
    """Solve with the first solver that finishes; returns the solver name used."""
    for name in solvers:
        try:
            problem.solve(solver=name, verbose=verbose)
        except CvxpySolverError as e:
            logger.warning(f"Solver {name} failed: {e}")
            continue
        if problem.status in _STATUS_MAP:
            return name
        logger.warning(f"Solver {name} returned status '{problem.status}', trying next")
    return solvers[-1]


class CvxpyBackend(SolverBackend):
    """
    Embedded backend built on cvxpy.

    Each PSD block becomes a cvxpy PSD variable; the scalar vector y is an
    affine expression of the free variables and the block entries.
    """

    name = "cvxpy"

    def __init__(self, solver: Union[str, Sequence[str], None] = None, verbose: bool = False):
        self.solvers = _solver_order(solver)
        self.verbose = verbose

    def build(self, instance: SDPInstance):
        """Assemble the cvxpy problem; returns (problem, y_expression)."""
        K = instance.n_vars
        free_idx = instance.free_indices()
        parts = []
        constraints = []
        if free_idx.size:
            free = cp.Variable(free_idx.size, name="free")
            S_free = sparse.csr_matrix(
                (np.ones(free_idx.size), (free_idx, np.arange(free_idx.size))), shape=(K, free_idx.size)
            )
            parts.append(cp.Constant(S_free) @ free)
        for k, index in enumerate(instance.psd_blocks):
            q = index.shape[0]
            X = cp.Variable((q, q), PSD=True, name=f"X{k}")
            rows, cols = np.triu_indices(q)
            # y[index[i, j]] = X[i, j], column-major position i + j*q
            S = sparse.csr_matrix(
                (np.ones(rows.size), (index[rows, cols], rows + cols * q)), shape=(K, q * q)
            )
            parts.append(cp.Constant(S) @ cp.reshape(X, (q * q,), order="F"))
        if not parts:
            raise ValueError("Program has no decision variables")
        y = parts[0]
        for part in parts[1:]:
            y = y + part
        if instance.n_equalities:
            constraints.append(cp.Constant(instance.A) @ y == instance.b)
        if instance.n_inequalities:
            constraints.append(cp.Constant(instance.G) @ y >= instance.h)
        objective = cp.Minimize(instance.c @ y + instance.c0)
        return cp.Problem(objective, constraints), y

    def solve(self, instance: SDPInstance) -> SolveResult:
        problem, y = self.build(instance)
        logger.info(f"Solving {instance.summary()} with {self.solvers}")
        start = time.perf_counter()
        used = _run(problem, self.solvers, self.verbose)
        elapsed = time.perf_counter() - start
        status = _STATUS_MAP.get(problem.status, NUMERICAL_ERROR)
        inaccurate = problem.status in (cp.OPTIMAL_INACCURATE, cp.INFEASIBLE_INACCURATE, cp.UNBOUNDED_INACCURATE)
        if inaccurate:
            logger.warning(f"Solver {used} reported inexact status '{problem.status}'")
        values = None
        objective = float("nan")
        if status == OPTIMAL and y.value is not None:
            values = np.asarray(y.value, dtype=float).reshape(-1)
            objective = instance.objective(values)
        logger.info(f"Solver {used} finished in {elapsed:.2f}s with status '{status}'")
        return SolveResult(status, values, objective, used, inaccurate, elapsed, {"raw_status": problem.status})


class SDPAFileBackend(SolverBackend):
    """Export-only backend: writes the instance for an external SDPA-format solver."""

    name = "sdpa-file"

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)

    def solve(self, instance: SDPInstance) -> SolveResult:
        write_sdpa(instance, self.path)
        return SolveResult(NUMERICAL_ERROR, None, float("nan"), self.name, info={"path": str(self.path)})


def solve_sdpa_problem(problem: SDPAProblem, solver: Union[str, Sequence[str], None] = None) -> SolveResult:
    """
    Solve an SDPA-format problem directly from its F matrices.

    Used to check exported files independently of the compiler's own lowering.
    """
    blocks = problem.dense_blocks()
    y = cp.Variable(problem.n_vars)
    constraints = []
    for k, size in enumerate(problem.block_struct):
        F = sum(
            (blocks[i + 1][k] * y[i] for i in range(problem.n_vars) if np.any(blocks[i + 1][k])),
            cp.Constant(-blocks[0][k]),
        )
        if size < 0:
            constraints.append(cp.diag(F) >= 0)
        else:
            constraints.append(0.5 * (F + F.T) >> 0)
    cp_problem = cp.Problem(cp.Minimize(problem.c @ y + problem.c0), constraints)
    used = _run(cp_problem, _solver_order(solver), False)
    status = _STATUS_MAP.get(cp_problem.status, NUMERICAL_ERROR)
    values = None if y.value is None else np.asarray(y.value).reshape(-1)
    objective = float(cp_problem.value) if status == OPTIMAL else float("nan")
    return SolveResult(status, values, objective, used)


def get_backend(name: str = "cvxpy", **kwargs) -> SolverBackend:
    """
    Backend factory.

    Raises:
        KeyError: For unknown backend names
    """
    if name == "cvxpy":
        return CvxpyBackend(**kwargs)
    if name == "sdpa-file":
        return SDPAFileBackend(**kwargs)
    raise KeyError(f"Unknown backend '{name}'. Available: ['cvxpy', 'sdpa-file']")
