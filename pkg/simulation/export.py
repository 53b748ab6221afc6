"""
Trajectory Export Module
CSV tables and vector plots of simulated trajectories
"""

from pathlib import Path
from typing import List, Optional, Sequence, Union
import logging

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from simulation.integrator import Trajectory
from simulation.styles import (
    DPI,
    FIGURE_FORMAT,
    FIGURE_METADATA,
    FIGURE_SIZE,
    SVG_HASH_SALT,
    ColorScheme,
    LineStyles,
)

# Setup logging
logger = logging.getLogger(__name__)

plt.rcParams["svg.hashsalt"] = SVG_HASH_SALT

DEFAULT_CSV_STATIONS = (0.25, 0.5, 0.75)


def _first(values: Optional[np.ndarray], steps: int) -> np.ndarray:
    if values is None or values.shape[1] == 0:
        return np.full(steps, np.nan)
    return values[:, 0]


def trajectory_frame(
    traj: Trajectory,
    stations: Sequence[float] = DEFAULT_CSV_STATIONS,
    component: int = 0,
) -> pd.DataFrame:
    """
    Table with columns t, e_z, z, z_hat and one field column per station.

    Observer runs report the error field T x_hat - T x at the stations,
    plant runs the field T x. Scalar outputs use their first channel.
    """
    steps = len(traj)
    stations = [float(s) for s in stations]
    columns = {
        "t": traj.t,
        "e_z": _first(traj.e_z, steps),
        "z": _first(traj.z, steps),
        "z_hat": _first(traj.z_hat, steps),
    }
    prefix = "e" if traj.has_observer else "x"
    if steps and traj.proj.n:
        values = traj.error_field(np.array(stations)) if traj.has_observer else traj.field(np.array(stations))
        for j, s in enumerate(stations):
            columns[f"{prefix}(s={s:g})"] = values[:, j, component]
    else:
        for s in stations:
            columns[f"{prefix}(s={s:g})"] = np.full(steps, np.nan)
    return pd.DataFrame(columns)


def emit_csv(
    traj: Trajectory,
    path: Union[str, Path],
    stations: Sequence[float] = DEFAULT_CSV_STATIONS,
    component: int = 0,
) -> Path:
    """
    Write a trajectory as CSV (header row, '.' decimal).

    Returns:
        The path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = trajectory_frame(traj, stations, component)
    frame.to_csv(path, index=False, float_format="%.10g")
    logger.info(f"Wrote {len(frame)} rows x {len(frame.columns)} columns to {path}")
    return path


def emit_plots(
    traj: Trajectory,
    prefix: Union[str, Path],
    component: int = 0,
    n_curves: int = 5,
) -> List[Path]:
    """
    Write two figures: the (error) field over time at a few stations and
    the regulated output overlay (z with z_hat and e_z for observer runs).

    Returns:
        Paths of the files written
    """
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    if traj.proj.n and len(traj):
        stations = traj.stations(n_curves)
        values = traj.error_field(stations) if traj.has_observer else traj.field(stations)
        for color, s, j in zip(ColorScheme.station_colors(len(stations)), stations, range(len(stations))):
            ax.plot(traj.t, values[:, j, component], color=color, linewidth=1.0, label=f"s = {s:.2f}")
        ax.set_ylabel("T e(t, s)" if traj.has_observer else "T x(t, s)")
    else:
        finite = traj.finite_state()
        for color, i in zip(ColorScheme.station_colors(max(finite.shape[1], 1)), range(finite.shape[1])):
            ax.plot(traj.t, finite[:, i], color=color, linewidth=1.0, label=f"x{i + 1}")
        ax.set_ylabel("state")
    ax.set_xlabel("t")
    ax.set_title("Error in estimated state" if traj.has_observer else "Plant state")
    ax.legend(loc="best", fontsize=8)
    path = prefix.with_name(f"{prefix.name}_field.{FIGURE_FORMAT}")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI, metadata=FIGURE_METADATA)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    if len(traj):
        ax.plot(traj.t, traj.z[:, 0] if traj.z.shape[1] else traj.t * 0, **LineStyles.get("z"))
        if traj.has_observer:
            ax.plot(traj.t, traj.z_hat[:, 0], **LineStyles.get("z_hat"))
            ax.plot(traj.t, traj.e_z[:, 0], **LineStyles.get("e_z"))
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("t")
    ax.set_ylabel("regulated output")
    path = prefix.with_name(f"{prefix.name}_output.{FIGURE_FORMAT}")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI, metadata=FIGURE_METADATA)
    plt.close(fig)
    written.append(path)

    logger.info(f"Wrote plots {[str(p) for p in written]}")
    return written
