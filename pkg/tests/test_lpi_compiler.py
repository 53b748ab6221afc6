"""
Test Suite for the LPI Compiler
Declarations, lowering to standard form, SDPA export and small solves
"""

import numpy as np
import pytest

from polynomials.poly_matrix import PolyMatrix
from operators.rl2 import RL2Function
from lpi.backends import SDPAFileBackend, get_backend, solve_sdpa_problem
from lpi.positive import basis_size
from lpi.program import LPIProgram
from lpi.sdp import read_sdpa, write_sdpa
from lpi.status import (
    INFEASIBLE,
    NUMERICAL_ERROR,
    OPTIMAL,
    InfeasibleError,
    NumericalSolverError,
    raise_for_status,
)
from tests.conftest import random_operator

SYMMETRIC = np.array([[2.0, 1.0], [1.0, 3.0]])


def eigenvalue_program() -> LPIProgram:
    """min t subject to t I - M >= 0, so t* = lambda_max(M)."""
    prog = LPIProgram(name="lambda-max")
    t = prog.decl_scalar("t")
    prog.constrain_psd(t.kron_identity(2) - PolyMatrix.constant(SYMMETRIC))
    prog.minimize(t)
    return prog


# =============================================================================
# DECLARATIONS AND LOWERING
# =============================================================================

def test_scalar_bound_compiles_to_one_row():
    prog = LPIProgram()
    g = prog.decl_scalar("gamma")
    prog.constrain_geq(g, 5.0)
    prog.minimize(g)
    instance = prog.compile()
    assert instance.n_vars == 1
    assert instance.n_inequalities == 1
    assert instance.n_equalities == 0
    np.testing.assert_allclose(instance.h, [5.0])
    np.testing.assert_allclose(instance.c, [1.0])


def test_duplicate_names_rejected():
    prog = LPIProgram()
    prog.decl_scalar("x")
    with pytest.raises(ValueError):
        prog.decl_scalar("x")


def test_symmetric_matrix_shares_variables():
    prog = LPIProgram()
    prog.decl_matrix_var("X", 3, psd=True)
    assert prog.n_vars == 6
    assert prog.compile().block_sizes == [3]


def test_positive_variable_is_positive(rng):
    prog = LPIProgram()
    P = prog.decl_pos_pi_var("P", (1, 1), degree=1)
    index = prog.variables["P.M"].indices
    q = basis_size(1, 1, 1)
    assert index.shape == (q, q)
    root = rng.standard_normal((q, q))
    y = np.zeros(prog.n_vars)
    y[index] = root @ root.T
    op = P.materialize(y)
    assert op.is_self_adjoint()
    for _ in range(5):
        f = RL2Function.random(rng, 1, 1, degree=3)
        assert f.inner(op.apply(f)) >= -1e-10


def test_psd_constraint_requires_self_adjoint(rng):
    prog = LPIProgram()
    with pytest.raises(ValueError):
        prog.constrain_psd(random_operator(rng, (1, 1), (1, 1)))


def test_objective_must_be_scalar():
    prog = LPIProgram()
    X = prog.decl_matrix_var("X", 2)
    with pytest.raises(ValueError):
        prog.minimize(X)


def test_free_variable_unknown_block():
    prog = LPIProgram()
    with pytest.raises(ValueError):
        prog.decl_free_pi_var("Z", (1, 0), (0, 1), {"Q3": 2})


def test_free_variable_blocks():
    prog = LPIProgram()
    Z = prog.decl_free_pi_var("Z", (1, 0), (1, 1), {"P": 0, "Q2": 3})
    assert Z.dims_in == (1, 0) and Z.dims_out == (1, 1)
    assert prog.n_vars == 1 + 4
    assert Z.Q2.degree == 3


# =============================================================================
# SOLVES
# =============================================================================

def test_scalar_bound_solves():
    prog = LPIProgram()
    g = prog.decl_scalar("gamma")
    prog.constrain_geq(g, 5.0)
    prog.minimize(g)
    result = prog.solve().raise_for_status()
    assert result.status == OPTIMAL
    assert result.scalar("gamma") == pytest.approx(5.0, abs=1e-6)


def test_largest_eigenvalue():
    result = eigenvalue_program().solve().raise_for_status()
    assert result.objective == pytest.approx(np.linalg.eigvalsh(SYMMETRIC).max(), abs=1e-5)
    assert result.residuals["equality"] <= 1e-6


def test_infeasible_program():
    prog = LPIProgram(name="contradiction")
    x = prog.decl_scalar("x")
    prog.constrain_geq(x, 1.0)
    prog.constrain_leq(x, 0.0)
    prog.minimize(x)
    result = prog.solve()
    assert result.status == INFEASIBLE
    with pytest.raises(InfeasibleError):
        result.raise_for_status()
    with pytest.raises(ValueError):
        result.scalar("x")


def test_status_mapping():
    raise_for_status(OPTIMAL)
    with pytest.raises(NumericalSolverError):
        raise_for_status(NUMERICAL_ERROR, "SCS")


# =============================================================================
# SDPA EXPORT
# =============================================================================

def test_sdpa_round_trip(tmp_path):
    instance = eigenvalue_program().compile()
    path = write_sdpa(instance, tmp_path / "lambda.dat-s", comment="lambda max")
    problem = read_sdpa(path)
    assert problem.n_vars == instance.n_vars
    np.testing.assert_allclose(problem.c, instance.c)
    assert problem.block_struct[0] == instance.block_sizes[0]
    assert problem.block_struct[-1] < 0


def test_sdpa_file_solves_to_same_optimum(tmp_path):
    instance = eigenvalue_program().compile()
    problem = read_sdpa(write_sdpa(instance, tmp_path / "lambda.dat-s"))
    result = solve_sdpa_problem(problem)
    assert result.status == OPTIMAL
    assert result.objective == pytest.approx(np.linalg.eigvalsh(SYMMETRIC).max(), abs=1e-5)


def test_sdpa_file_backend_only_exports(tmp_path):
    backend = get_backend("sdpa-file", path=tmp_path / "out.dat-s")
    assert isinstance(backend, SDPAFileBackend)
    result = eigenvalue_program().solve(backend)
    assert result.status == NUMERICAL_ERROR
    assert (tmp_path / "out.dat-s").exists()


def test_read_sdpa_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_sdpa(tmp_path / "missing.dat-s")
    bad = tmp_path / "bad.dat-s"
    bad.write_text("1 = mDIM\n")
    with pytest.raises(ValueError):
        read_sdpa(bad)


def test_unknown_backend():
    with pytest.raises(KeyError):
        get_backend("mosek-remote")
