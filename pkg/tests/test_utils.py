"""
Test Suite for Utility Functions
Tests for formatting helpers and validators
"""

import pytest

from operators.pi_operator import PIOperator
from operators.serialization import save_operators
from utils.helpers import (
    create_slug,
    final_to_peak,
    fmt_float,
    fmt_percentage,
    relative_drift,
    safe_divide,
)
from utils.validators import (
    validate_operator_file,
    validate_output_dir,
    validate_preset_name,
)


# =============================================================================
# HELPERS
# =============================================================================

def test_formatting():
    assert fmt_float(0.70710678, 4) == "0.7071"
    assert fmt_float(float("inf")) == "inf"
    assert fmt_percentage(0.0523, 2) == "5.23%"


def test_create_slug():
    assert create_slug("Reaction-Diffusion (N=8)") == "reaction-diffusion_n_8"
    assert create_slug("???") == "system"


def test_safe_divide():
    assert safe_divide(1.0, 4.0) == 0.25
    assert safe_divide(1.0, 0.0, default=-1.0) == -1.0


def test_final_to_peak():
    assert final_to_peak([0.0, -2.0, 0.5]) == pytest.approx(0.25)
    assert final_to_peak([]) == 0.0
    assert final_to_peak([0.0, 0.0], default=1.0) == 1.0


def test_relative_drift():
    assert relative_drift([2.0, 2.1, 1.9]) == pytest.approx(0.05)
    assert relative_drift([0.0, 1.0]) is None


# =============================================================================
# VALIDATORS
# =============================================================================

def test_validate_preset_name():
    assert validate_preset_name("ode-test")[0]
    assert not validate_preset_name("ode-test", demo=True)[0]
    assert validate_preset_name("beam", demo=True)[0]


def test_validate_operator_file(tmp_path):
    path = save_operators(tmp_path / "op.json", {"I": PIOperator.identity(1, 1)}, meta={"kind": "test"})
    assert validate_operator_file(str(path)) == (True, None)
    assert validate_operator_file(str(path), kind="test")[0]
    assert not validate_operator_file(str(path), kind="pie_system")[0]
    assert not validate_operator_file(str(tmp_path / "none.json"))[0]


def test_validate_output_dir(tmp_path):
    assert validate_output_dir(str(tmp_path / "new" / "dir"))[0]
    blocker = tmp_path / "file.txt"
    blocker.write_text("x")
    assert not validate_output_dir(str(blocker))[0]
