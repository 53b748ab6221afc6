"""
Test Suite for the Command-Line Interface
Run configuration parsing, exit codes and written artifacts
"""

import json

import pytest

from app.main import (
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_IO,
    EXIT_OK,
    main,
    parse_run_config,
)
from app.run_config import load_run_config


# =============================================================================
# RUN CONFIGURATION
# =============================================================================

def test_flags_override_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"preset": "ode-test", "method": "gramian", "degree": 2}))
    cfg = parse_run_config(["norm", "--config", str(path), "--degree", "3"])
    assert cfg.command == "norm"
    assert cfg.method == "gramian"
    assert cfg.degree == 3


def test_demo_name_is_preset():
    cfg = parse_run_config(["demo", "beam"])
    assert cfg.preset == "beam"


@pytest.mark.parametrize("argv", [
    ["demo", "ode-test"],
    ["norm"],
    ["norm", "--preset", "ode-test", "--system", "sys.json"],
    ["norm", "--preset", "heat-3d"],
    ["norm", "--preset", "ode-test", "--degree", "0"],
    ["norm", "--preset", "ode-test", "--degree", "3", "--max-degree", "2"],
    ["sim", "--preset", "ode-test", "--log-level", "chatty"],
])
def test_invalid_options(argv):
    with pytest.raises(ValueError):
        parse_run_config(argv)


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"preset": "ode-test", "solver_name": "SCS"}))
    with pytest.raises(ValueError):
        load_run_config("norm", path)


def test_config_file_must_be_object(tmp_path):
    path = tmp_path / "run.json"
    path.write_text("[1, 2]")
    with pytest.raises(ValueError):
        load_run_config("norm", path)


# =============================================================================
# EXIT CODES
# =============================================================================

def test_missing_system_file_is_io_error(tmp_path):
    code = main(["norm", "--system", str(tmp_path / "none.json"), "--out", str(tmp_path)])
    assert code == EXIT_IO


def test_missing_config_file_is_io_error(tmp_path):
    assert main(["norm", "--config", str(tmp_path / "none.json")]) == EXIT_IO


def test_bad_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text("{not json")
    assert main(["norm", "--config", str(path)]) == EXIT_CONFIG


def test_unknown_flag_is_config_error():
    assert main(["norm", "--preset", "ode-test", "--colour"]) == EXIT_CONFIG


def test_unknown_disturbance_is_config_error(tmp_path):
    code = main(["sim", "--preset", "ode-test", "--disturbance", "chirp", "--out", str(tmp_path)])
    assert code == EXIT_CONFIG


def test_norm_writes_certificate(tmp_path, capsys):
    code = main(["norm", "--preset", "ode-test", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert "gamma = 0.70" in capsys.readouterr().out
    assert (tmp_path / "ode-test_certificate.json").exists()
    assert "verification: passed" in (tmp_path / "ode-test_norm.txt").read_text()


def test_norm_outputs_are_reproducible(tmp_path):
    for run in ("a", "b"):
        assert main(["norm", "--preset", "ode-test", "--out", str(tmp_path / run)]) == EXIT_OK
    for name in ("ode-test_norm.txt", "ode-test_certificate.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_norm_export_only(tmp_path):
    code = main(["norm", "--preset", "ode-test", "--backend", "sdpa-file", "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert (tmp_path / "ode-test_instance.dat-s").exists()
    assert not (tmp_path / "ode-test_certificate.json").exists()


def test_synth_then_sim(tmp_path):
    assert main(["synth", "--preset", "ode-estimator", "--out", str(tmp_path)]) == EXIT_OK
    gain = tmp_path / "ode-estimator_gain.json"
    assert gain.exists()
    code = main([
        "sim", "--preset", "ode-estimator", "--gain", str(gain),
        "--dt", "0.01", "--tfinal", "1.0", "--out", str(tmp_path),
    ])
    assert code == EXIT_OK
    assert (tmp_path / "ode-estimator_observer.csv").exists()
    assert (tmp_path / "ode-estimator_observer_field.svg").exists()


def test_synth_without_measurement_is_config_error(tmp_path):
    assert main(["synth", "--preset", "ode-test", "--out", str(tmp_path)]) == EXIT_CONFIG


@pytest.mark.slow
def test_unstable_plant_norm_is_infeasible(tmp_path):
    code = main([
        "norm", "--preset", "reaction-diffusion", "--degree", "1", "--max-degree", "2",
        "--out", str(tmp_path),
    ])
    assert code == EXIT_INFEASIBLE
    assert "infeasible" in (tmp_path / "reaction-diffusion_norm.txt").read_text()
