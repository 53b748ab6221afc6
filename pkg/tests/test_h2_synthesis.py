"""
Test Suite for H2 Bounds and Estimator Synthesis
Norm certificates, Schur complement checks and Luenberger gains
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from polynomials.poly_matrix import PolyMatrix
from operators.pi_operator import PIOperator
from operators.serialization import load_operators
from pie.system import ObserverGain, PIESystem, error_system
from lpi.backends import solve_sdpa_problem
from lpi.sdp import read_sdpa
from lpi.status import INFEASIBLE, OPTIMAL
from synthesis.certificates import (
    Verification,
    probe_margin,
    projected_spectrum,
    save_certificate,
    verify_certificate,
    verify_synthesis,
    write_report,
)
from synthesis.estimator import reconstruct_gain, synthesize_estimator
from synthesis.h2_norm import (
    direction_sup_by_simulation,
    h2_bound_gramian,
    h2_bound_schur,
    h2_norm_dense,
    h2_norm_ode,
)
from synthesis.schur import schur_consistency_check

ODE_TEST_NORM = 1.0 / math.sqrt(2.0)
ESTIMATOR_NORM = math.sqrt(2.0)


# =============================================================================
# DENSE REFERENCES
# =============================================================================

def test_dense_norm_of_ode_test(ode_test):
    dense = h2_norm_ode(ode_test)
    assert dense.trace_norm == pytest.approx(ODE_TEST_NORM, rel=1e-12)
    assert dense.direction_sup == pytest.approx(ODE_TEST_NORM, rel=1e-12)


def test_dense_norms_sandwich(rng):
    for _ in range(20):
        A = rng.standard_normal((3, 3)) - 4.0 * np.eye(3)
        B = rng.standard_normal((3, 2))
        C = rng.standard_normal((1, 3))
        dense = h2_norm_dense(A, B, C)
        assert dense.direction_sup <= dense.trace_norm + 1e-12
        assert dense.trace_norm <= math.sqrt(2.0) * dense.direction_sup + 1e-12


def test_dense_norm_rejects_unstable():
    with pytest.raises(ValueError):
        h2_norm_dense([[1.0]], [[1.0]], [[1.0]])


def test_dense_norm_requires_ode(reaction_diffusion):
    with pytest.raises(ValueError):
        h2_norm_ode(reaction_diffusion)


def test_direction_sup_by_simulation(ode_test):
    value = direction_sup_by_simulation(ode_test, n_directions=1, dt=0.01, t_final=10.0)
    assert value == pytest.approx(ODE_TEST_NORM, rel=1e-2)



def test_two_input_sandwich_by_simulation(ode_two_input):
    dense = h2_norm_ode(ode_two_input)
    simulated = direction_sup_by_simulation(ode_two_input, n_directions=32, dt=0.01, t_final=15.0)
    assert simulated == pytest.approx(dense.direction_sup, rel=1e-2)
    assert simulated <= dense.trace_norm * (1.0 + 1e-3)
    assert dense.trace_norm <= math.sqrt(2.0) * simulated * (1.0 + 1e-3)

# =============================================================================
# LPI BOUNDS
# =============================================================================

@pytest.mark.parametrize("bound", [h2_bound_gramian, h2_bound_schur])
def test_ode_test_bound(bound, ode_test):
    cert = bound(ode_test)
    assert cert.status == OPTIMAL
    assert cert.feasible
    assert cert.gamma == pytest.approx(ODE_TEST_NORM, rel=2e-2)
    assert cert.gamma >= ODE_TEST_NORM * (1.0 - 1e-4)


@pytest.mark.parametrize("bound", [h2_bound_gramian, h2_bound_schur])
def test_two_input_bound_matches_trace_norm(bound, ode_two_input):
    reference = h2_norm_ode(ode_two_input).trace_norm
    cert = bound(ode_two_input)
    assert cert.gamma == pytest.approx(reference, rel=2e-2)


@pytest.mark.parametrize("bound", [h2_bound_gramian, h2_bound_schur])
def test_certificate_verifies(bound, ode_test):
    cert = bound(ode_test)
    verification = verify_certificate(ode_test, cert)
    assert verification.passed
    assert set(verification.margins) >= {"positivity", "trace"}


def test_certificate_files(tmp_path, ode_test):
    cert = h2_bound_schur(ode_test)
    items = load_operators(save_certificate(cert, tmp_path / "cert.json"))
    assert items["__meta__"]["kind"] == "norm_certificate"
    assert items["gamma"] == pytest.approx(cert.gamma)
    report = write_report(tmp_path / "report.txt", cert, verify_certificate(ode_test, cert, n_probes=10))
    text = report.read_text()
    assert "gamma:" in text
    assert "verification: passed" in text


def without_disturbance(sys: PIESystem) -> PIESystem:
    return replace(sys, B1=sys.B1.scale(0.0), name=f"{sys.name}-undisturbed")


def test_schur_bound_without_disturbance(ode_test):
    cert = h2_bound_schur(without_disturbance(ode_test))
    assert cert.feasible
    assert cert.gamma < 1e-2
    np.testing.assert_allclose(cert.W, 0.0, atol=1e-2)


@pytest.mark.parametrize("preset", ["ode_test", "ode_two_input"])
def test_schur_bound_monotone_in_degree(preset, request):
    sys = request.getfixturevalue(preset)
    gammas = [h2_bound_schur(sys, degree=d).gamma for d in (1, 2, 3)]
    for coarse, fine in zip(gammas, gammas[1:]):
        assert fine <= coarse * (1.0 + 1e-5)


def decaying_average() -> PIESystem:
    """x_t = -x + w on L2[0, 1], z = int x ds: the average obeys z' = -z + w."""
    one = PolyMatrix.scalar({(0, 0): 1.0}).with_vars("s")
    I = PIOperator.identity(0, 1)
    return PIESystem(
        T=I,
        A=I.scale(-1.0),
        B1=PIOperator.build(Q2=one, dims_in=(1, 0), dims_out=(0, 1)),
        C1=PIOperator.build(Q1=one, dims_in=(0, 1), dims_out=(1, 0)),
        C2=PIOperator.zero((0, 1), (0, 0)),
        D21=np.zeros((0, 1)),
        name="decaying-average",
    )


@pytest.mark.slow
def test_distributed_schur_bound_monotone_in_degree():
    sys = decaying_average()
    gammas = [h2_bound_schur(sys, degree=d).gamma for d in (1, 2, 3)]
    for coarse, fine in zip(gammas, gammas[1:]):
        assert fine <= coarse * (1.0 + 1e-5)
    assert gammas[-1] >= ODE_TEST_NORM * (1.0 - 1e-3)


def test_exported_instance_solves_to_embedded_gamma(tmp_path, ode_test):
    path = tmp_path / "ode_schur.dat-s"
    cert = h2_bound_schur(ode_test, export_sdpa=path)
    result = solve_sdpa_problem(read_sdpa(path))
    assert result.status == OPTIMAL
    assert result.objective == pytest.approx(cert.gamma, rel=1e-2)


def test_sdpa_export_during_bound(tmp_path, ode_test):
    h2_bound_schur(ode_test, export_sdpa=tmp_path / "ode.dat-s")
    assert (tmp_path / "ode.dat-s").read_text().startswith('"')


@pytest.mark.slow
def test_unstable_reaction_diffusion_has_no_certificate(reaction_diffusion):
    cert = h2_bound_schur(reaction_diffusion, degree=1, max_degree=2)
    assert cert.status == INFEASIBLE
    assert cert.gamma == math.inf
    assert cert.P is None
    with pytest.raises(ValueError):
        verify_certificate(reaction_diffusion, cert)
    with pytest.raises(ValueError):
        save_certificate(cert, "unused.json")


# =============================================================================
# PROBING
# =============================================================================

def test_probe_margin_signs(rng):
    I = PIOperator.identity(1, 1)
    assert probe_margin(I, 0.5, rng=rng, n_probes=10) > 0.0
    assert probe_margin(I.scale(-1.0), 0.5, negative=True, rng=rng, n_probes=10) > 0.0
    assert probe_margin(I.scale(-1.0), 0.0, rng=rng, n_probes=10) < 0.0


def test_projected_spectrum_of_multiplier():
    op = PIOperator.multiplier(PolyMatrix.scalar({(0, 0): 1.0, (1, 0): 1.0}))
    eigs = projected_spectrum(op, degree=6)
    assert eigs[0] >= 1.0 - 1e-3
    assert eigs[-1] <= 2.0 + 1e-9


def test_verification_tolerance():
    assert Verification({"a": -1e-7}, tolerance=1e-5).passed
    assert not Verification({"a": -1e-3}, tolerance=1e-5).passed
    assert Verification().worst == math.inf


# =============================================================================
# SCHUR COMPLEMENT
# =============================================================================

def random_symmetric(rng, k):
    X = rng.standard_normal((k, k))
    return X @ X.T + rng.uniform(-1.5, 1.5) * np.eye(k)


def test_schur_matches_dense_eigenvalues(rng):
    eps = 1e-6
    for _ in range(100):
        P, R = random_symmetric(rng, 2), random_symmetric(rng, 2)
        Q = rng.standard_normal((2, 2))
        report = schur_consistency_check(
            PIOperator.matrix(P), PIOperator.matrix(Q), PIOperator.matrix(R), eps=eps
        )
        dense = np.linalg.eigvalsh(np.block([[P, Q.T], [Q, R]]))[0]
        assert report.block_holds == (dense > eps)
        assert report.consistent


def test_schur_on_distributed_operators():
    I = PIOperator.identity(0, 1)
    Q = PIOperator.multiplier(PolyMatrix.scalar({(0, 0): 0.5}))
    report = schur_consistency_check(I.scale(2.0), Q, I, probe_degree=4)
    assert report.block_holds
    assert report.complement_holds
    assert report.complement_min == pytest.approx(1.0 - 0.125, abs=1e-6)


def test_schur_converse_uses_implied_margin():
    # complement clears eps while the block only clears the implied margin
    report = schur_consistency_check(
        PIOperator.matrix([[0.2]]), PIOperator.matrix([[0.4]]), PIOperator.matrix([[1.0]]), eps=0.1
    )
    assert report.complement_min == pytest.approx(0.2, rel=1e-9)
    assert not report.block_holds
    assert report.complement_holds
    assert report.implied_block_margin == pytest.approx(0.1 / 9.0, rel=1e-9)
    assert report.block_min > report.implied_block_margin
    assert report.consistent


def test_schur_dimension_mismatch():
    with pytest.raises(ValueError):
        schur_consistency_check(
            PIOperator.matrix(np.eye(2)), PIOperator.matrix(np.ones((1, 1))), PIOperator.matrix(np.eye(1))
        )


# =============================================================================
# ESTIMATOR SYNTHESIS
# =============================================================================

def test_scalar_estimator(ode_estimator):
    result = synthesize_estimator(ode_estimator)
    assert result.feasible
    assert not result.warning
    assert result.gamma == pytest.approx(ESTIMATOR_NORM, rel=5e-2)
    assert result.L.L1[0, 0] == pytest.approx(-2.0, rel=1e-1)
    err = error_system(ode_estimator, result.L)
    assert h2_norm_ode(err).trace_norm <= result.gamma * (1.0 + 1e-3)


def test_estimator_verifies(ode_estimator):
    result = synthesize_estimator(ode_estimator)
    verification = verify_synthesis(ode_estimator, result)
    assert verification.passed
    assert "error_output" in verification.margins


def test_destabilizing_gain_fails_verification(ode_estimator):
    result = synthesize_estimator(ode_estimator)
    forged = replace(result, L=ObserverGain(np.array([[5.0]]), result.L.L2))
    verification = verify_synthesis(ode_estimator, forged)
    assert not verification.passed
    assert verification.margins["error_output"] < 0.0
    assert verification.margins["output"] >= -verification.tolerance


def test_estimator_requires_measurement(ode_test):
    with pytest.raises(ValueError):
        synthesize_estimator(ode_test)


def test_estimator_without_measurement_information(ode_two_input):
    blind = replace(ode_two_input, C2=PIOperator.zero((2, 0), (1, 0)), D21=np.zeros((1, 2)))
    result = synthesize_estimator(blind)
    assert result.feasible
    assert result.gamma == pytest.approx(h2_bound_schur(ode_two_input).gamma, rel=2e-2)


def test_reconstruct_gain_divides_by_constant_p():
    P = PIOperator.identity(0, 1).scale(2.0)
    Z = PIOperator.build(
        Q2=PolyMatrix.scalar({(1, 0): 4.0}), dims_in=(1, 0), dims_out=(0, 1)
    )
    L = reconstruct_gain(P, Z)
    assert L.L2.evaluate(0.5)[0, 0] == pytest.approx(1.0, rel=1e-8)


@pytest.mark.slow
def test_reaction_diffusion_estimator(reaction_diffusion):
    result = synthesize_estimator(reaction_diffusion, degree=1, max_degree=2)
    assert result.feasible
    assert result.L.state_dims == (0, 1)
    assert math.isfinite(result.gamma)
