"""
Time Integration Module
Fixed-step RK4 integration of projected PIE plants and of plant/observer pairs
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union
import logging
import math

import numpy as np
from scipy import integrate, linalg
from tqdm import tqdm

from operators.rl2 import RL2Function
from pie.system import ObserverGain, PIESystem
from simulation.galerkin import DEFAULT_ORDER, Profile, ProjectedSystem, lobatto_points, project

# Setup logging
logger = logging.getLogger(__name__)

MASS_CONDITION_LIMIT = 1e12
BLOWUP_LIMIT = 1e12
STABILITY_TARGET = 0.5      # |lambda| * h per RK4 substep
DEFAULT_STATIONS = 41

Signal = Callable[[float], np.ndarray]


class SimulationError(Exception):
    """Base class for simulation failures."""


class IllConditionedMassError(SimulationError):
    """Raised when the projected mass matrix M_T cannot be inverted reliably."""

    def __init__(self, condition: float):
        super().__init__(f"Mass matrix condition number {condition:.3e} exceeds {MASS_CONDITION_LIMIT:.0e}")
        self.condition = condition


class BlowUpError(SimulationError):
    """Raised when the state leaves the representable range; carries the time."""

    def __init__(self, time: float, norm: float):
        super().__init__(f"Solution blew up at t = {time:.6g} (|c| = {norm:.3e})")
        self.time = time
        self.norm = norm


# =============================================================================
# TRAJECTORY
# =============================================================================

@dataclass
class Trajectory:
    """
    Sampled solution of a projected system.

    coeffs holds the PIE-state coefficients per step; observer runs also
    carry the estimate coefficients and outputs.
    """

    t: np.ndarray
    coeffs: np.ndarray
    z: np.ndarray
    y: np.ndarray
    w: np.ndarray
    proj: ProjectedSystem
    coeffs_hat: Optional[np.ndarray] = None
    z_hat: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return self.t.size

    @property
    def has_observer(self) -> bool:
        return self.coeffs_hat is not None

    @property
    def e_z(self) -> Optional[np.ndarray]:
        """Error output z_hat - z."""
        return None if self.z_hat is None else self.z_hat - self.z

    def field(self, s: Optional[np.ndarray] = None) -> np.ndarray:
        """Physical state T x at points s, shape (steps, len(s), n)."""
        s = self.stations() if s is None else s
        return np.einsum("snk,tk->tsn", self.proj.field_matrix(s), self.coeffs)

    def field_hat(self, s: Optional[np.ndarray] = None) -> np.ndarray:
        if not self.has_observer:
            raise ValueError("Trajectory has no observer estimate")
        s = self.stations() if s is None else s
        return np.einsum("snk,tk->tsn", self.proj.field_matrix(s), self.coeffs_hat)

    def error_field(self, s: Optional[np.ndarray] = None) -> np.ndarray:
        """T x_hat - T x at points s."""
        return self.field_hat(s) - self.field(s)

    def finite_state(self) -> np.ndarray:
        """Finite part of T x, shape (steps, m)."""
        return self.coeffs @ self.proj.finite_matrix().T

    def stations(self, count: int = DEFAULT_STATIONS) -> np.ndarray:
        return lobatto_points(count, self.proj.domain)

    def field_sup(self, error: bool = False) -> np.ndarray:
        """sup_s |field| per step on the station grid, over all components."""
        values = self.error_field() if error else self.field()
        if values.shape[1] * values.shape[2] == 0:
            finite = self.coeffs_hat - self.coeffs if error else self.coeffs
            return np.max(np.abs(finite @ self.proj.finite_matrix().T), axis=1, initial=0.0)
        return np.max(np.abs(values), axis=(1, 2))

    def field_norm(self, error: bool = False) -> np.ndarray:
        """RL2 norm of T x (or of T x_hat - T x) per step."""
        return np.sqrt(2.0 * self.energy(None, error))

    def energy(self, weights: Optional[Sequence[float]] = None, error: bool = False) -> np.ndarray:
        """
        Energy proxy 1/2 (|x_T|^2 + int sum_c w_c (T x)_c^2 ds) per step,
        with x_T the finite part of T x.
        """
        proj = self.proj
        coeffs = self.coeffs_hat - self.coeffs if error else self.coeffs
        w = np.ones(proj.n) if weights is None else np.asarray(weights, dtype=float)
        if w.size != proj.n:
            raise ValueError(f"Expected {proj.n} energy weights, got {w.size}")
        finite = coeffs @ proj.finite_matrix().T
        values = np.einsum("snk,tk->tsn", proj.field_matrix(proj.nodes), coeffs)
        dist = np.einsum("s,tsn,n->t", proj.weights, values ** 2, w)
        return 0.5 * (np.sum(finite ** 2, axis=1) + dist)


def output_energy(traj: Trajectory, error: bool = False) -> float:
    """Time integral of |z|^2 (or |e_z|^2) by the trapezoid rule."""
    z = traj.e_z if error else traj.z
    if z is None or traj.t.size < 2:
        return 0.0
    return float(integrate.trapezoid(np.sum(z ** 2, axis=1), traj.t))


# =============================================================================
# INTEGRATION
# =============================================================================

def mass_solve(proj: ProjectedSystem, *rhs: np.ndarray) -> Tuple[np.ndarray, ...]:
    """
    Solve M_T X = rhs for each right-hand side with one LU factorization.

    Raises:
        IllConditionedMassError: If cond(M_T) exceeds the limit
    """
    if proj.size == 0:
        return tuple(np.zeros_like(r) for r in rhs)
    condition = float(np.linalg.cond(proj.M_T))
    if not np.isfinite(condition) or condition > MASS_CONDITION_LIMIT:
        raise IllConditionedMassError(condition)
    lu = linalg.lu_factor(proj.M_T)
    logger.debug(f"Mass matrix condition number {condition:.3e}")
    return tuple(linalg.lu_solve(lu, r) for r in rhs)


def substeps_for(F: np.ndarray, dt: float) -> int:
    """Number of RK4 substeps keeping |lambda| h within the stability target."""
    if F.size == 0:
        return 1
    radius = float(np.max(np.abs(np.linalg.eigvals(F))))
    return max(1, math.ceil(radius * dt / STABILITY_TARGET))


def _zero_signal(nw: int) -> Signal:
    return lambda t: np.zeros(nw)


def integrate_linear(
    F: np.ndarray,
    G: np.ndarray,
    w: Signal,
    x0: np.ndarray,
    dt: float,
    t_final: float,
    progress: bool = False,
    label: str = "simulate",
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Classical RK4 for x' = F x + G w(t) on a fixed grid.

    The reported grid has step dt; each step is split into equal substeps
    when the spectrum of F requires it.

    Returns:
        Tuple (t, states, inputs) sampled at every reported step

    Raises:
        BlowUpError: If the state becomes non-finite or exceeds the limit
    """
    if dt <= 0 or t_final < 0:
        raise ValueError(f"Need dt > 0 and t_final >= 0, got dt={dt}, t_final={t_final}")
    steps = int(round(t_final / dt))
    t = dt * np.arange(steps + 1)
    sub = substeps_for(F, dt)
    h = dt / sub
    if sub > 1:
        logger.info(f"{label}: {sub} RK4 substeps per step of {dt:g}")
    states = np.zeros((steps + 1, x0.size))
    w0 = np.asarray(w(0.0), dtype=float).reshape(-1)
    inputs = np.zeros((steps + 1, w0.size))
    states[0] = x0
    inputs[0] = w0

    def rhs(time: float, x: np.ndarray) -> np.ndarray:
        return F @ x + G @ np.asarray(w(time), dtype=float).reshape(-1)

    x = x0.astype(float)
    for k in tqdm(range(steps), desc=label, disable=not progress, leave=False):
        for j in range(sub):
            time = t[k] + j * h
            k1 = rhs(time, x)
            k2 = rhs(time + 0.5 * h, x + 0.5 * h * k1)
            k3 = rhs(time + 0.5 * h, x + 0.5 * h * k2)
            k4 = rhs(time + h, x + h * k3)
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        norm = float(np.linalg.norm(x))
        if not np.isfinite(norm) or norm > BLOWUP_LIMIT:
            raise BlowUpError(float(t[k + 1]), norm)
        states[k + 1] = x
        inputs[k + 1] = np.asarray(w(t[k + 1]), dtype=float).reshape(-1)
    return t, states, inputs


def simulate(
    proj: ProjectedSystem,
    w: Optional[Signal],
    x0: Union[RL2Function, Profile, None],
    dt: float,
    t_final: float,
    finite0: Optional[Sequence[float]] = None,
    progress: bool = False,
) -> Trajectory:
    """
    Integrate M_T c' = M_A c + M_B w(t) from the projected initial state.

    Args:
        proj: Projected system
        w: Disturbance signal t -> R^nw (zero when None)
        x0: Physical initial state T x(0) (RL2Function or profile)
        dt: Reported time step
        t_final: Final time
        finite0: Finite part of T x(0) when x0 is a profile

    Raises:
        IllConditionedMassError, BlowUpError
    """
    nw = proj.M_B.shape[1]
    w = w or _zero_signal(nw)
    F, G = mass_solve(proj, proj.M_A, proj.M_B)
    c0 = proj.initial_coefficients(x0, finite0)
    t, coeffs, inputs = integrate_linear(F, G, w, c0, dt, t_final, progress, f"simulate {proj.name}")
    z = coeffs @ proj.M_C1.T
    y = coeffs @ proj.M_C2.T + inputs @ proj.D21.T
    logger.info(f"Simulated {proj.name} to t = {t[-1]:g} in {t.size - 1} steps")
    return Trajectory(t, coeffs, z, y, inputs, proj)


def simulate_observer(
    plant: PIESystem,
    L: ObserverGain,
    w: Optional[Signal],
    plant_ic: Union[RL2Function, Profile, None],
    order: int = DEFAULT_ORDER,
    dt: float = 0.002,
    t_final: float = 2.0,
    finite0: Optional[Sequence[float]] = None,
    proj: Optional[ProjectedSystem] = None,
    progress: bool = False,
) -> Trajectory:
    """
    Co-integrate the plant and the Luenberger observer

        T x_hat' = A x_hat + L (C2 x_hat - y),  x_hat(0) = 0

    driven by the plant measurement y = C2 x + D21 w. The observer does not
    see the disturbance.

    Raises:
        ValueError: If the gain does not match the plant
        IllConditionedMassError, BlowUpError
    """
    if L.state_dims != (plant.m, plant.n) or L.ny != plant.ny:
        raise ValueError(f"Gain {L.state_dims} x {L.ny} does not fit {plant!r}")
    proj = proj or project(plant, order)
    nw = proj.M_B.shape[1]
    w = w or _zero_signal(nw)
    F, G, H = mass_solve(proj, proj.M_A, proj.M_B, proj.gain_matrix(L))
    K = proj.size
    HC = H @ proj.M_C2
    F_aug = np.block([[F, np.zeros((K, K))], [-HC, F + HC]])
    G_aug = np.vstack([G, -H @ proj.D21])
    c0 = proj.initial_coefficients(plant_ic, finite0)
    x0 = np.concatenate([c0, np.zeros(K)])
    t, states, inputs = integrate_linear(F_aug, G_aug, w, x0, dt, t_final, progress, f"observer {proj.name}")
    coeffs, coeffs_hat = states[:, :K], states[:, K:]
    traj = Trajectory(
        t=t,
        coeffs=coeffs,
        z=coeffs @ proj.M_C1.T,
        y=coeffs @ proj.M_C2.T + inputs @ proj.D21.T,
        w=inputs,
        proj=proj,
        coeffs_hat=coeffs_hat,
        z_hat=coeffs_hat @ proj.M_C1.T,
    )
    logger.info(f"Observer run for {plant.name}: final |e_z| = {float(np.linalg.norm(traj.e_z[-1])):.3e}")
    return traj
