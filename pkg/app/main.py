"""
PI Estimator Toolkit
Command-line entry point: H2 norm bounds, estimator synthesis and simulation

Usage:
    python -m app.main norm --preset ode-test
    python -m app.main synth --preset reaction-diffusion --out output/rd
    python -m app.main sim --preset reaction-diffusion --gain output/rd/reaction-diffusion_gain.json
    python -m app.main demo beam
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from colorama import Fore, Style, init as colorama_init

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from app.config import config
from app.run_config import RunConfig, load_run_config
from lpi.backends import get_backend
from lpi.status import InfeasibleError, SolverError
from operators.inversion import InversionError
from pie.examples import Preset, disturbance, get_preset, initial_condition
from pie.system import ObserverGain, PIESystem, load_system
from simulation import SimulationError, Trajectory, emit_csv, emit_plots, project, simulate, simulate_observer
from synthesis import (
    h2_bound_gramian,
    h2_bound_schur,
    save_certificate,
    synthesize_estimator,
    verify_certificate,
    verify_synthesis,
    write_report,
)
from utils.helpers import create_slug, final_to_peak, fmt_float, fmt_percentage, relative_drift
from utils.validators import validate_operator_file, validate_output_dir

logger = logging.getLogger("app.main")

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_SOLVER = 3
EXIT_IO = 4
EXIT_CONFIG = 5


class ArgumentError(ValueError):
    """Invalid command-line arguments."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ArgumentError(message)


# ====================================
# Console Output
# ====================================
def ok(text: str):
    print(f"{Fore.GREEN}{text}{Style.RESET_ALL}")


def warn(text: str):
    print(f"{Fore.YELLOW}{text}{Style.RESET_ALL}")


def fail(text: str):
    print(f"{Fore.RED}{text}{Style.RESET_ALL}", file=sys.stderr)


def setup_logging(level: str):
    """Configure root logging to stderr and the optional log file."""
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if config.LOG_FILE:
        Path(config.LOG_FILE).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(config.LOG_FILE))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        handlers=handlers,
        force=True,
    )


# ====================================
# Shared Steps
# ====================================
def resolve_system(cfg: RunConfig) -> Tuple[PIESystem, Optional[Preset]]:
    """Preset or saved system named by the run."""
    if cfg.preset is not None:
        preset = get_preset(cfg.preset)
        return preset.system(), preset
    return load_system(cfg.system), None


def output_path(cfg: RunConfig, sys_: PIESystem, suffix: str) -> Path:
    return cfg.out_dir / f"{create_slug(sys_.name)}_{suffix}"


def make_backend(cfg: RunConfig, sys_: PIESystem):
    if cfg.backend == "sdpa-file":
        return get_backend("sdpa-file", path=output_path(cfg, sys_, "instance.dat-s"))
    return get_backend("cvxpy", solver=None if cfg.backend == "cvxpy" else cfg.backend)


def export_only(cfg: RunConfig, sys_: PIESystem, run) -> bool:
    """Run a solve with the export-only backend; True when it was used."""
    if cfg.backend != "sdpa-file":
        return False
    try:
        run()
    except SolverError:
        pass
    ok(f"Exported SDPA instance to {output_path(cfg, sys_, 'instance.dat-s')}")
    return True


def run_simulation(cfg: RunConfig, sys_: PIESystem, preset: Optional[Preset], gain: Optional[ObserverGain]) -> Trajectory:
    dt = cfg.dt or (preset.dt if preset else 0.01)
    t_final = cfg.t_final or (preset.t_final if preset else 1.0)
    ic = initial_condition(cfg.ic or (preset.ic if preset else "zero"), sys_.n)
    w = disturbance(cfg.disturbance or (preset.disturbance if preset else "zero"), sys_.nw)
    finite0 = preset.ode_state0 if preset and preset.ode_state0 else None
    proj = project(sys_, cfg.order, config.QUADRATURE_NODES)
    if gain is None:
        return simulate(proj, w, ic, dt, t_final, finite0, progress=True)
    return simulate_observer(sys_, gain, w, ic, cfg.order, dt, t_final, finite0, proj=proj, progress=True)


def write_trajectory(cfg: RunConfig, sys_: PIESystem, traj: Trajectory, tag: str) -> List[Path]:
    csv_path = emit_csv(traj, output_path(cfg, sys_, f"{tag}.csv"))
    plots = emit_plots(traj, output_path(cfg, sys_, tag))
    return [csv_path, *plots]


# ====================================
# Commands
# ====================================
def cmd_norm(cfg: RunConfig) -> int:
    """H2 norm bound of a PIE system; writes the certificate and a report."""
    sys_, _ = resolve_system(cfg)
    bound = h2_bound_schur if cfg.method == "schur" else h2_bound_gramian
    backend = make_backend(cfg, sys_)

    def run():
        return bound(sys_, cfg.degree, cfg.eps, backend, cfg.max_degree, cfg.export_sdpa)

    if export_only(cfg, sys_, run):
        return EXIT_OK
    cert = run()
    report = output_path(cfg, sys_, "norm.txt")
    if not cert.feasible:
        write_report(report, cert)
        fail(f"{sys_.name}: no H2 norm certificate up to degree {cert.degree} ({cert.status})")
        return EXIT_INFEASIBLE
    verification = verify_certificate(sys_, cert, solver_tol=cfg.solver_tol)
    save_certificate(cert, output_path(cfg, sys_, "certificate.json"))
    write_report(report, cert, verification)
    ok(f"{sys_.name}: H2 norm bound gamma = {fmt_float(cert.gamma, 6)} ({cfg.method}, degree {cert.degree})")
    if not verification.passed:
        warn(f"Certificate re-check worst margin {fmt_float(verification.worst)}")
    return EXIT_OK


def cmd_synth(cfg: RunConfig) -> int:
    """Estimator synthesis; writes the gain, the certificate and a report."""
    sys_, _ = resolve_system(cfg)
    backend = make_backend(cfg, sys_)

    def run():
        return synthesize_estimator(
            sys_, cfg.degree, cfg.eps, backend, cfg.max_degree,
            inversion_degree=cfg.inversion_degree, inversion_tol=cfg.inversion_tol,
            export_sdpa=cfg.export_sdpa,
        )

    if export_only(cfg, sys_, run):
        return EXIT_OK
    result = run()
    report = output_path(cfg, sys_, "synthesis.txt")
    if not result.feasible:
        write_report(report, result)
        fail(f"{sys_.name}: no estimator certificate up to degree {result.degree} ({result.status})")
        return EXIT_INFEASIBLE
    verification = verify_synthesis(sys_, result, solver_tol=cfg.solver_tol)
    save_certificate(result, output_path(cfg, sys_, "synthesis.json"))
    gain_path = result.L.save(output_path(cfg, sys_, "gain.json"), meta={"system": sys_.name, "gamma": result.gamma})
    write_report(report, result, verification)
    ok(f"{sys_.name}: estimator H2 bound gamma = {fmt_float(result.gamma, 6)} (degree {result.degree})")
    ok(f"Gain written to {gain_path}")
    if result.warning:
        warn(f"Gain reconstruction residual {fmt_float(result.inversion_residual)} exceeds {cfg.inversion_tol:g}")
    return EXIT_OK


def cmd_sim(cfg: RunConfig) -> int:
    """Plant simulation, or plant and observer when a gain file is given."""
    sys_, preset = resolve_system(cfg)
    if cfg.gain:
        is_valid, error = validate_operator_file(cfg.gain)
        if not is_valid:
            fail(error)
            return EXIT_IO
    gain = ObserverGain.load(cfg.gain) if cfg.gain else None
    traj = run_simulation(cfg, sys_, preset, gain)
    paths = write_trajectory(cfg, sys_, traj, "observer" if gain else "plant")
    if gain:
        ok(f"{sys_.name}: final |e_z| = {fmt_float(abs(traj.e_z[-1, 0]) if traj.e_z.shape[1] else 0.0)}")
    else:
        ok(f"{sys_.name}: final |T x| = {fmt_float(traj.field_norm()[-1])}")
    ok(f"Wrote {', '.join(str(p) for p in paths)}")
    return EXIT_OK


def cmd_demo(cfg: RunConfig) -> int:
    """Open-loop run, estimator synthesis and observer run for a figure preset."""
    preset = get_preset(cfg.preset)
    sys_ = preset.system()

    plant = run_simulation(cfg, sys_, preset, None)
    write_trajectory(cfg, sys_, plant, "plant")
    if cfg.preset == "beam":
        drift = relative_drift(plant.energy(preset.energy_weights))
        ok(f"Open-loop energy drift {fmt_percentage(drift or 0.0, 2)}")
    else:
        norms = plant.field_norm()
        ok(f"Open-loop |T x| grows from {fmt_float(norms[0])} to {fmt_float(norms[-1])}")

    synth_cfg = cfg.model_copy(update={"command": "synth"})
    status = cmd_synth(synth_cfg)
    if status != EXIT_OK or cfg.backend == "sdpa-file":
        return status

    gain = ObserverGain.load(output_path(cfg, sys_, "gain.json"))
    observer = run_simulation(cfg, sys_, preset, gain)
    write_trajectory(cfg, sys_, observer, "observer")
    field_ratio = final_to_peak(observer.field_sup(error=True))
    output_ratio = final_to_peak(observer.e_z[:, 0]) if observer.e_z.shape[1] else 0.0
    ok(f"Error field at t = {fmt_float(observer.t[-1])}: {fmt_percentage(field_ratio)} of peak")
    ok(f"Error output at t = {fmt_float(observer.t[-1])}: {fmt_percentage(output_ratio)} of peak")
    return EXIT_OK


COMMANDS = {"norm": cmd_norm, "synth": cmd_synth, "sim": cmd_sim, "demo": cmd_demo}


# ====================================
# Argument Parsing
# ====================================
def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    source = common.add_argument_group("system")
    source.add_argument("--preset", help="Built-in system (ode-test, reaction-diffusion, beam, ...)")
    source.add_argument("--system", help="Saved PIE system file (JSON)")
    source.add_argument("--config", help="Run configuration file (JSON); flags override it")

    solver = common.add_argument_group("solver")
    solver.add_argument("--degree", type=int, help="Monomial degree of the positive-operator parameterization")
    solver.add_argument("--max-degree", dest="max_degree", type=int, help="Highest degree tried on infeasibility")
    solver.add_argument("--eps", type=float, help="Strictness margin")
    solver.add_argument("--method", choices=["gramian", "schur"], help="Norm bound formulation (norm only)")
    solver.add_argument("--backend", help="cvxpy solver name, 'cvxpy', or 'sdpa-file' (export only)")
    solver.add_argument("--export-sdpa", dest="export_sdpa", help="Also write the SDP instance to this path")

    sim = common.add_argument_group("simulation")
    sim.add_argument("--order", type=int, help="Chebyshev basis order")
    sim.add_argument("--dt", type=float, help="Reported time step")
    sim.add_argument("--tfinal", dest="t_final", type=float, help="Final time")
    sim.add_argument("--ic", help="Initial condition preset (zero, linear, neg-half-square)")
    sim.add_argument("--disturbance", help="Disturbance preset (zero, sin100)")
    sim.add_argument("--gain", help="Observer gain file (sim only)")

    common.add_argument("--out", help="Output directory")
    common.add_argument("--log-level", dest="log_level", help="Logging level")

    parser = _Parser(prog="pitools", description=config.APP_NAME)
    parser.add_argument("--version", action="version", version=config.APP_VERSION)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("norm", parents=[common], help="Bound the H2 norm of a system")
    sub.add_parser("synth", parents=[common], help="Synthesize an H2-optimal estimator")
    sub.add_parser("sim", parents=[common], help="Simulate a plant (and observer)")
    demo = sub.add_parser("demo", parents=[common], help="End-to-end estimator demo")
    demo.add_argument("name", nargs="?", help="reaction-diffusion or beam")
    return parser


def parse_run_config(argv: Optional[List[str]] = None) -> RunConfig:
    """
    Parse flags into a validated RunConfig.

    Raises:
        ArgumentError, FileNotFoundError, ValueError
    """
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_file = args.pop("config")
    name = args.pop("name", None)
    if name is not None:
        args["preset"] = name
    return load_run_config(command, config_file, args)


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns the process exit code."""
    colorama_init()
    try:
        cfg = parse_run_config(argv)
    except FileNotFoundError as e:
        fail(str(e))
        return EXIT_IO
    except ValueError as e:
        fail(f"Invalid configuration: {e}")
        return EXIT_CONFIG

    setup_logging(cfg.log_level)
    is_valid, error = validate_output_dir(cfg.out)
    if not is_valid:
        fail(error)
        return EXIT_IO

    try:
        return COMMANDS[cfg.command](cfg)
    except InfeasibleError as e:
        fail(f"Infeasible: {e}")
        return EXIT_INFEASIBLE
    except (SolverError, InversionError, SimulationError) as e:
        logger.exception("Numerical failure")
        fail(f"Numerical failure: {e}")
        return EXIT_SOLVER
    except OSError as e:
        fail(f"I/O error: {e}")
        return EXIT_IO
    except (KeyError, ValueError) as e:
        fail(f"Invalid configuration: {e}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
