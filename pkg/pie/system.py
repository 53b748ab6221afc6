"""
PIE System Module
Partial integral equation systems, auxiliary initial-condition systems and
observer error dynamics
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Tuple, Union
import logging

import numpy as np

from polynomials.poly_matrix import PolyMatrix
from operators.pi_operator import PIOperator
from operators.rl2 import RL2Function
from operators.serialization import load_operators, save_operators

# Setup logging
logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PIESystem:
    """
    PIE plant

        d/dt (T x) = A x + B1 w
                 z = C1 x
                 y = C2 x + D21 w

    with state x in R^m x L2^n[a, b], disturbance w in R^nw, regulated
    output z in R^nz and measurement y in R^ny.
    """

    T: PIOperator
    A: PIOperator
    B1: PIOperator
    C1: PIOperator
    C2: PIOperator
    D21: np.ndarray
    name: str = field(default="pie")

    def __post_init__(self):
        object.__setattr__(self, "D21", np.atleast_2d(np.asarray(self.D21, dtype=float)).reshape(
            self.C2.dims_out[0], self.B1.dims_in[0]
        ))
        state = self.T.dims_in
        checks = {
            "T": (self.T.dims_in, self.T.dims_out, state, state),
            "A": (self.A.dims_in, self.A.dims_out, state, state),
            "B1": (self.B1.dims_in, self.B1.dims_out, (self.nw, 0), state),
            "C1": (self.C1.dims_in, self.C1.dims_out, state, (self.nz, 0)),
            "C2": (self.C2.dims_in, self.C2.dims_out, state, (self.ny, 0)),
        }
        for name, (got_in, got_out, want_in, want_out) in checks.items():
            if got_in != want_in or got_out != want_out:
                raise ValueError(
                    f"{name} maps {got_in}->{got_out}, expected {want_in}->{want_out}"
                )
        domains = {op.domain for op in (self.T, self.A, self.B1, self.C1, self.C2)}
        if len(domains) != 1:
            raise ValueError(f"Operators do not share a domain: {sorted(domains)}")

    @property
    def m(self) -> int:
        return self.T.dims_in[0]

    @property
    def n(self) -> int:
        return self.T.dims_in[1]

    @property
    def nw(self) -> int:
        return self.B1.dims_in[0]

    @property
    def nz(self) -> int:
        return self.C1.dims_out[0]

    @property
    def ny(self) -> int:
        return self.C2.dims_out[0]

    @property
    def dims(self) -> Tuple[int, int, int, int, int]:
        return (self.m, self.n, self.nw, self.nz, self.ny)

    @property
    def domain(self) -> Tuple[float, float]:
        return self.T.domain

    @property
    def D21_operator(self) -> PIOperator:
        return PIOperator.build(P=self.D21, dims_in=(self.nw, 0), dims_out=(self.ny, 0), domain=self.domain)

    def operators(self) -> Dict[str, PIOperator]:
        return {"T": self.T, "A": self.A, "B1": self.B1, "C1": self.C1, "C2": self.C2}

    def __repr__(self) -> str:
        return f"<PIESystem({self.name}, m={self.m}, n={self.n}, nw={self.nw}, nz={self.nz}, ny={self.ny})>"


@dataclass(frozen=True, eq=False)
class AuxiliarySystem:
    """
    Undisturbed system d/dt (T x) = A x, z = C1 x started from the physical
    state T x(0) = B x0.
    """

    T: PIOperator
    A: PIOperator
    C1: PIOperator
    B: PIOperator

    def __post_init__(self):
        state = self.T.dims_in
        if self.A.dims_in != state or self.B.dims_out != state or self.C1.dims_in != state:
            raise ValueError("Auxiliary system operators have inconsistent dimensions")

    @property
    def n_directions(self) -> int:
        return self.B.dims_in[0]

    def initial_state(self, x0: np.ndarray):
        """Physical initial state T x(0) = B x0 for the direction x0."""
        x0 = np.asarray(x0, dtype=float).reshape(-1)
        return self.B.apply(RL2Function(x0, PolyMatrix.zeros(0, 1, self.B.domain)))


@dataclass(frozen=True, eq=False)
class ObserverGain:
    """
    Luenberger gain L = [L1 0; L2 0] from R^ny into R^m x L2^n.

    L1 corrects the finite state and L2(s) the distributed state.
    """

    L1: np.ndarray
    L2: PolyMatrix

    def __post_init__(self):
        L1 = np.atleast_2d(np.asarray(self.L1, dtype=float))
        if L1.size == 0:
            L1 = np.zeros((0, self.L2.cols))
        object.__setattr__(self, "L1", L1)
        if L1.shape[1] != self.L2.cols:
            raise ValueError(f"L1 has {L1.shape[1]} columns, L2 has {self.L2.cols}")

    @property
    def ny(self) -> int:
        return self.L2.cols

    @property
    def state_dims(self) -> Tuple[int, int]:
        return (self.L1.shape[0], self.L2.rows)

    @classmethod
    def zero(cls, m: int, n: int, ny: int, domain=(0.0, 1.0)) -> "ObserverGain":
        return cls(np.zeros((m, ny)), PolyMatrix.zeros(n, ny, domain, "s"))

    @classmethod
    def from_operator(cls, L: PIOperator) -> "ObserverGain":
        """Extract (L1, L2) from an operator with only the P and Q2 slots populated."""
        if L.dims_in[1] != 0:
            raise ValueError("Gain operator must act on a finite-dimensional space")
        return cls(L.P_matrix(), L.Q2)

    def as_operator(self) -> PIOperator:
        m, n = self.state_dims
        return PIOperator.build(
            P=self.L1, Q2=self.L2, dims_in=(self.ny, 0), dims_out=(m, n), domain=self.L2.domain
        )

    def save(self, path: Union[str, Path], meta: Dict = None) -> Path:
        return save_operators(
            path, {"L1": self.L1.tolist(), "L2": self.L2}, meta={"kind": "observer_gain", **(meta or {})}
        )

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ObserverGain":
        items = load_operators(path)
        if "L1" not in items or "L2" not in items:
            raise ValueError(f"{path} does not contain an observer gain")
        L2 = items["L2"]
        L1 = np.asarray(items["L1"], dtype=float).reshape(-1, L2.cols)
        return cls(L1, L2)


# =============================================================================
# DERIVED SYSTEMS
# =============================================================================

def error_system(plant: PIESystem, L: ObserverGain) -> PIESystem:
    """
    Observer error dynamics for e = x_hat - x:

        d/dt (T e) = (A + L C2) e - (B1 + L D21) w,   z_e = C1 e

    Raises:
        ValueError: If the gain does not match the plant dimensions
    """
    if L.state_dims != (plant.m, plant.n) or L.ny != plant.ny:
        raise ValueError(
            f"Gain {L.state_dims} x {L.ny} does not fit plant state {(plant.m, plant.n)} x {plant.ny}"
        )
    L_op = L.as_operator()
    A_err = plant.A + L_op @ plant.C2
    B_err = -(plant.B1 + L_op @ plant.D21_operator)
    no_measurement = PIOperator.zero((plant.m, plant.n), (0, 0), plant.domain)
    return PIESystem(
        T=plant.T,
        A=A_err,
        B1=B_err,
        C1=plant.C1,
        C2=no_measurement,
        D21=np.zeros((0, plant.nw)),
        name=f"{plant.name}-error",
    )


def auxiliary_system(sys: PIESystem) -> AuxiliarySystem:
    """Drop the disturbance channel and use B1 as the initial-condition injector."""
    return AuxiliarySystem(T=sys.T, A=sys.A, C1=sys.C1, B=sys.B1)


# =============================================================================
# PERSISTENCE
# =============================================================================

def save_system(sys: PIESystem, path: Union[str, Path]) -> Path:
    """Write a PIE system, one named block per operator."""
    items = dict(sys.operators())
    items["D21"] = sys.D21.tolist()
    return save_operators(path, items, meta={"kind": "pie_system", "name": sys.name})


def load_system(path: Union[str, Path]) -> PIESystem:
    """
    Read a PIE system written by save_system.

    Raises:
        FileNotFoundError: If the file is missing
        ValueError: If the file holds something other than a PIE system
    """
    items = load_operators(path)
    meta = items.get("__meta__", {})
    if meta.get("kind") != "pie_system":
        raise ValueError(f"{path} does not contain a PIE system")
    C2 = items["C2"]
    B1 = items["B1"]
    D21 = np.asarray(items["D21"], dtype=float).reshape(C2.dims_out[0], B1.dims_in[0])
    return PIESystem(
        T=items["T"], A=items["A"], B1=B1, C1=items["C1"], C2=C2, D21=D21,
        name=meta.get("name", Path(path).stem),
    )
