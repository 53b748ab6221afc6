"""
PIE package
System containers, observer error dynamics and example presets
"""

from pie.system import (
    PIESystem,
    AuxiliarySystem,
    ObserverGain,
    error_system,
    auxiliary_system,
    save_system,
    load_system,
)
from pie.examples import (
    PRESETS,
    Preset,
    get_preset,
    example_reaction_diffusion,
    example_euler_bernoulli,
    disturbance,
    initial_condition,
)

__all__ = [
    "PIESystem",
    "AuxiliarySystem",
    "ObserverGain",
    "error_system",
    "auxiliary_system",
    "save_system",
    "load_system",
    "PRESETS",
    "Preset",
    "get_preset",
    "example_reaction_diffusion",
    "example_euler_bernoulli",
    "disturbance",
    "initial_condition",
]
