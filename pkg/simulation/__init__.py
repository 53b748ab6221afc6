"""
Simulation package
Chebyshev-Galerkin projection, RK4 integration and trajectory export
"""

from simulation.galerkin import (
    DEFAULT_ORDER,
    ProjectedSystem,
    chebyshev_basis,
    chebyshev_polynomial,
    galerkin_matrix,
    lobatto_points,
    project,
)
from simulation.integrator import (
    BlowUpError,
    IllConditionedMassError,
    SimulationError,
    Trajectory,
    output_energy,
    simulate,
    simulate_observer,
)
from simulation.export import emit_csv, emit_plots, trajectory_frame

__all__ = [
    "DEFAULT_ORDER",
    "ProjectedSystem",
    "chebyshev_basis",
    "chebyshev_polynomial",
    "galerkin_matrix",
    "lobatto_points",
    "project",
    "BlowUpError",
    "IllConditionedMassError",
    "SimulationError",
    "Trajectory",
    "output_energy",
    "simulate",
    "simulate_observer",
    "emit_csv",
    "emit_plots",
    "trajectory_frame",
]
