"""
PIE Example Presets
Pre-encoded systems, disturbance signals and initial conditions
"""

from dataclasses import dataclass
from typing import Callable, Dict, Tuple
import logging

import numpy as np

from polynomials.poly_matrix import PolyMatrix
from operators.pi_operator import PIOperator
from pie.system import PIESystem

# Setup logging
logger = logging.getLogger(__name__)

DOMAIN = (0.0, 1.0)

Signal = Callable[[float], np.ndarray]
InitialCondition = Callable[[np.ndarray], np.ndarray]


def _poly(coeffs: Dict[Tuple[int, int], float]) -> PolyMatrix:
    return PolyMatrix.scalar(coeffs, DOMAIN)


def _matrix_poly(entries) -> PolyMatrix:
    """Assemble a PolyMatrix from a nested list of scalar coefficient maps."""
    rows, cols = len(entries), len(entries[0])
    blocks: Dict[Tuple[int, int], np.ndarray] = {}
    for r, row in enumerate(entries):
        for c, coeffs in enumerate(row):
            for key, value in coeffs.items():
                block = blocks.setdefault(key, np.zeros((rows, cols)))
                block[r, c] += value
    return PolyMatrix(rows, cols, blocks, DOMAIN)


# =============================================================================
# ODE SYSTEMS (n = 0)
# =============================================================================

def _ode_system(A, B1, C1, C2=None, D21=None, name="ode") -> PIESystem:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B1 = np.atleast_2d(np.asarray(B1, dtype=float))
    C1 = np.atleast_2d(np.asarray(C1, dtype=float))
    m, nw = A.shape[0], B1.shape[1]
    C2 = np.zeros((0, m)) if C2 is None else np.atleast_2d(np.asarray(C2, dtype=float))
    D21 = np.zeros((C2.shape[0], nw)) if D21 is None else np.atleast_2d(np.asarray(D21, dtype=float))
    return PIESystem(
        T=PIOperator.identity(m, 0, DOMAIN),
        A=PIOperator.build(P=A, dims_in=(m, 0), dims_out=(m, 0), domain=DOMAIN),
        B1=PIOperator.build(P=B1, dims_in=(nw, 0), dims_out=(m, 0), domain=DOMAIN),
        C1=PIOperator.build(P=C1, dims_in=(m, 0), dims_out=(C1.shape[0], 0), domain=DOMAIN),
        C2=PIOperator.build(P=C2, dims_in=(m, 0), dims_out=(C2.shape[0], 0), domain=DOMAIN),
        D21=D21,
        name=name,
    )


def example_ode_test() -> PIESystem:
    """Scalar stable ODE x' = -x + w, z = x."""
    return _ode_system(A=[[-1.0]], B1=[[1.0]], C1=[[1.0]], name="ode-test")


def example_ode_estimator() -> PIESystem:
    """Scalar unstable plant x' = x, z = x, y = x + w."""
    return _ode_system(A=[[1.0]], B1=[[0.0]], C1=[[1.0]], C2=[[1.0]], D21=[[1.0]], name="ode-estimator")


def example_ode_two_input() -> PIESystem:
    """Stable 2-state, 2-input ODE."""
    return _ode_system(
        A=[[-1.0, 0.5], [0.0, -2.0]],
        B1=[[1.0, 0.0], [0.5, 1.0]],
        C1=[[1.0, 1.0]],
        C2=[[1.0, 0.0]],
        D21=[[0.0, 1.0]],
        name="ode-two-input",
    )


# =============================================================================
# DISTRIBUTED SYSTEMS
# =============================================================================

def example_reaction_diffusion() -> PIESystem:
    """
    Unstable reaction-diffusion PIE on [0, 1] (m = 0, n = 1).

    T: R1 = -theta, R2 = -s
    A: R0 = s^2 + 0.2, R1 = -2 theta, R2 = -3 s
    B1 = -s^2/2, C1 = s^2/2 - s, C2 = -s, D21 = 1
    """
    T = PIOperator.build(
        R1=_poly({(0, 1): -1.0}),
        R2=_poly({(1, 0): -1.0}).with_vars("st"),
        dims_in=(0, 1), dims_out=(0, 1), domain=DOMAIN,
    )
    A = PIOperator.build(
        R0=_poly({(2, 0): 1.0, (0, 0): 0.2}),
        R1=_poly({(0, 1): -2.0}),
        R2=_poly({(1, 0): -3.0}).with_vars("st"),
        dims_in=(0, 1), dims_out=(0, 1), domain=DOMAIN,
    )
    B1 = PIOperator.build(Q2=_poly({(2, 0): -0.5}), dims_in=(1, 0), dims_out=(0, 1), domain=DOMAIN)
    C1 = PIOperator.build(Q1=_poly({(2, 0): 0.5, (1, 0): -1.0}), dims_in=(0, 1), dims_out=(1, 0), domain=DOMAIN)
    C2 = PIOperator.build(Q1=_poly({(1, 0): -1.0}), dims_in=(0, 1), dims_out=(1, 0), domain=DOMAIN)
    return PIESystem(T=T, A=A, B1=B1, C1=C1, C2=C2, D21=[[1.0]], name="reaction-diffusion")


def example_euler_bernoulli() -> PIESystem:
    """
    Euler-Bernoulli beam PIE on [0, 1] (m = 0, n = 2).

    The printed PI parameters are used as given; see the warnings logged on
    construction for the places where they differ from the PDE form.
    """
    logger.warning(
        "Beam preset: disturbance kernel taken as s^2/2 from the PI parameters; "
        "the PDE form has (s^2 - 2s)/2"
    )
    logger.warning("Beam preset: the undefined input u(t) of the first-order form is ignored")
    logger.warning("Beam preset: regulated output kernel taken as 0.5*s^2 - s from the PI parameters")
    zero = {}
    T = PIOperator.build(
        R1=_matrix_poly([[{(1, 0): 1.0, (0, 1): -1.0}, zero], [zero, zero]]).with_vars("st"),
        R2=_matrix_poly([[zero, zero], [zero, {(1, 0): -1.0, (0, 1): 1.0}]]).with_vars("st"),
        dims_in=(0, 2), dims_out=(0, 2), domain=DOMAIN,
    )
    A = PIOperator.build(
        R0=PolyMatrix.constant([[0.0, -0.1], [1.0, 0.0]], DOMAIN, "s"),
        dims_in=(0, 2), dims_out=(0, 2), domain=DOMAIN,
    )
    B1 = PIOperator.build(
        Q2=_matrix_poly([[{(2, 0): 0.5}], [zero]]),
        dims_in=(1, 0), dims_out=(0, 2), domain=DOMAIN,
    )
    C1 = PIOperator.build(
        Q1=_matrix_poly([[{(2, 0): 0.5, (1, 0): -1.0}, zero]]),
        dims_in=(0, 2), dims_out=(1, 0), domain=DOMAIN,
    )
    C2 = PIOperator.build(
        Q1=_matrix_poly([[{(1, 0): -1.0}, zero]]),
        dims_in=(0, 2), dims_out=(1, 0), domain=DOMAIN,
    )
    return PIESystem(T=T, A=A, B1=B1, C1=C1, C2=C2, D21=[[1.0]], name="beam")


# =============================================================================
# SIGNALS AND INITIAL CONDITIONS
# =============================================================================

def _zero_signal(nw: int) -> Signal:
    return lambda t: np.zeros(nw)


def _sin100(nw: int) -> Signal:
    return lambda t: np.full(nw, np.sin(100.0 * t))


DISTURBANCES: Dict[str, Callable[[int], Signal]] = {
    "zero": _zero_signal,
    "sin100": _sin100,
}


def _profile_ic(profile: Callable[[np.ndarray], np.ndarray]) -> Callable[[int], InitialCondition]:
    """Profile in the first distributed component, zero elsewhere."""
    def factory(n: int) -> InitialCondition:
        def ic(s: np.ndarray) -> np.ndarray:
            s = np.asarray(s, dtype=float)
            values = np.zeros((s.size, n))
            if n:
                values[:, 0] = profile(s)
            return values
        return ic
    return factory


INITIAL_CONDITIONS: Dict[str, Callable[[int], InitialCondition]] = {
    "zero": _profile_ic(lambda s: np.zeros_like(s)),
    "linear": _profile_ic(lambda s: s),
    "neg-half-square": _profile_ic(lambda s: -0.5 * s ** 2),
}


def disturbance(name: str, nw: int) -> Signal:
    """
    Named disturbance signal.

    Raises:
        KeyError: For unknown names
    """
    if name not in DISTURBANCES:
        raise KeyError(f"Unknown disturbance '{name}'. Available: {sorted(DISTURBANCES)}")
    return DISTURBANCES[name](nw)


def initial_condition(name: str, n: int) -> InitialCondition:
    """
    Named physical initial condition (values of T x(0) on a grid).

    Raises:
        KeyError: For unknown names
    """
    if name not in INITIAL_CONDITIONS:
        raise KeyError(f"Unknown initial condition '{name}'. Available: {sorted(INITIAL_CONDITIONS)}")
    return INITIAL_CONDITIONS[name](n)


# =============================================================================
# PRESET REGISTRY
# =============================================================================

@dataclass(frozen=True)
class Preset:
    """A named system with its default simulation settings."""

    name: str
    factory: Callable[[], PIESystem]
    dt: float = 0.002
    t_final: float = 2.0
    ic: str = "neg-half-square"
    disturbance: str = "sin100"
    energy_weights: Tuple[float, ...] = (1.0,)
    ode_state0: Tuple[float, ...] = ()

    def system(self) -> PIESystem:
        return self.factory()


PRESETS: Dict[str, Preset] = {
    "ode-test": Preset("ode-test", example_ode_test, dt=0.002, t_final=5.0, ic="zero",
                       disturbance="zero", ode_state0=(1.0,)),
    "ode-estimator": Preset("ode-estimator", example_ode_estimator, dt=0.002, t_final=5.0,
                            ic="zero", disturbance="zero", ode_state0=(1.0,)),
    "ode-two-input": Preset("ode-two-input", example_ode_two_input, dt=0.002, t_final=5.0,
                            ic="zero", disturbance="zero", ode_state0=(1.0, 0.0)),
    "reaction-diffusion": Preset("reaction-diffusion", example_reaction_diffusion, dt=0.002,
                                 t_final=2.0, ic="neg-half-square", disturbance="sin100"),
    "beam": Preset("beam", example_euler_bernoulli, dt=0.01, t_final=10.0,
                   ic="neg-half-square", disturbance="zero", energy_weights=(1.0, 0.1)),
}


def get_preset(name: str) -> Preset:
    """
    Look up a preset by name.

    Raises:
        KeyError: For unknown names
    """
    if name not in PRESETS:
        raise KeyError(f"Unknown preset '{name}'. Available: {sorted(PRESETS)}")
    return PRESETS[name]


def list_presets() -> Dict[str, str]:
    return {name: (preset.factory.__doc__ or "").strip().splitlines()[0] for name, preset in PRESETS.items()}
