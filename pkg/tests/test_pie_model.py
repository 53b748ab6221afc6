"""
Test Suite for PIE Systems
Preset dimensions, error dynamics, auxiliary systems and persistence
"""

import numpy as np
import pytest

from polynomials.poly_matrix import PolyMatrix
from operators.pi_operator import PIOperator
from pie.examples import (
    PRESETS,
    disturbance,
    get_preset,
    initial_condition,
    list_presets,
)
from pie.system import (
    ObserverGain,
    PIESystem,
    auxiliary_system,
    error_system,
    load_system,
    save_system,
)


# =============================================================================
# PRESETS
# =============================================================================

@pytest.mark.parametrize("name,dims", [
    ("ode-test", (1, 0, 1, 1, 0)),
    ("ode-estimator", (1, 0, 1, 1, 1)),
    ("ode-two-input", (2, 0, 2, 1, 1)),
    ("reaction-diffusion", (0, 1, 1, 1, 1)),
    ("beam", (0, 2, 1, 1, 1)),
])
def test_preset_dimensions(name, dims):
    sys = get_preset(name).system()
    assert sys.dims == dims
    assert sys.name == name
    assert sys.domain == (0.0, 1.0)


def test_list_presets_has_descriptions():
    listing = list_presets()
    assert set(listing) == set(PRESETS)
    assert all(listing.values())


def test_unknown_preset():
    with pytest.raises(KeyError):
        get_preset("heat-3d")


def test_reaction_diffusion_coefficients(reaction_diffusion):
    A = reaction_diffusion.A
    assert A.R0.evaluate(0.5)[0, 0] == pytest.approx(0.45)
    assert A.R1.evaluate(0.5, 0.25)[0, 0] == pytest.approx(-0.5)
    assert A.R2.evaluate(0.5, 0.75)[0, 0] == pytest.approx(-1.5)
    assert reaction_diffusion.T.R1.evaluate(0.5, 0.25)[0, 0] == pytest.approx(-0.25)
    np.testing.assert_allclose(reaction_diffusion.D21, [[1.0]])


def test_mismatched_operators_rejected(ode_test):
    with pytest.raises(ValueError):
        PIESystem(
            T=ode_test.T,
            A=PIOperator.identity(2, 0),
            B1=ode_test.B1,
            C1=ode_test.C1,
            C2=ode_test.C2,
            D21=ode_test.D21,
        )


# =============================================================================
# SIGNALS AND INITIAL CONDITIONS
# =============================================================================

def test_sin100_disturbance():
    w = disturbance("sin100", 2)
    np.testing.assert_allclose(w(0.01), np.full(2, np.sin(1.0)))


def test_neg_half_square_profile():
    ic = initial_condition("neg-half-square", 2)
    values = ic(np.array([0.0, 0.5, 1.0]))
    np.testing.assert_allclose(values[:, 0], [0.0, -0.125, -0.5])
    np.testing.assert_allclose(values[:, 1], 0.0)


def test_unknown_signal_names():
    with pytest.raises(KeyError):
        disturbance("chirp", 1)
    with pytest.raises(KeyError):
        initial_condition("step", 1)


# =============================================================================
# DERIVED SYSTEMS
# =============================================================================

def test_error_system_for_scalar_estimator(ode_estimator):
    L = ObserverGain(np.array([[-2.0]]), PolyMatrix.zeros(0, 1, (0.0, 1.0), "s"))
    err = error_system(ode_estimator, L)
    assert err.ny == 0
    assert err.A.P_matrix()[0, 0] == pytest.approx(-1.0)
    assert err.B1.P_matrix()[0, 0] == pytest.approx(2.0)
    assert err.name == "ode-estimator-error"


def test_error_system_rejects_wrong_gain(reaction_diffusion):
    with pytest.raises(ValueError):
        error_system(reaction_diffusion, ObserverGain.zero(1, 0, 1))


def test_zero_gain_error_system_matches_plant(reaction_diffusion):
    err = error_system(reaction_diffusion, ObserverGain.zero(0, 1, 1))
    assert err.A.allclose(reaction_diffusion.A)
    assert err.B1.allclose(-reaction_diffusion.B1)


def test_auxiliary_initial_state(reaction_diffusion):
    aux = auxiliary_system(reaction_diffusion)
    assert aux.n_directions == 1
    state = aux.initial_state([1.0])
    np.testing.assert_allclose(state.values(np.array([0.5]))[0], [-0.125])


def test_gain_operator_round_trip():
    L = ObserverGain(np.zeros((0, 1)), PolyMatrix.scalar({(1, 0): 2.0}).with_vars("s"))
    assert ObserverGain.from_operator(L.as_operator()).L2 == L.L2
    assert L.state_dims == (0, 1)


# =============================================================================
# PERSISTENCE
# =============================================================================

def test_system_round_trip(tmp_path, beam):
    path = save_system(beam, tmp_path / "beam.json")
    loaded = load_system(path)
    assert loaded.name == "beam"
    assert loaded.dims == beam.dims
    for name, op in beam.operators().items():
        assert loaded.operators()[name] == op
    np.testing.assert_array_equal(loaded.D21, beam.D21)


def test_gain_round_trip(tmp_path):
    L = ObserverGain(np.array([[-2.0]]), PolyMatrix.zeros(0, 1, (0.0, 1.0), "s"))
    loaded = ObserverGain.load(L.save(tmp_path / "gain.json"))
    np.testing.assert_array_equal(loaded.L1, L.L1)


def test_load_system_rejects_other_bundles(tmp_path):
    L = ObserverGain.zero(1, 0, 1)
    path = L.save(tmp_path / "gain.json")
    with pytest.raises(ValueError):
        load_system(path)


def test_load_system_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_system(tmp_path / "nope.json")
