"""
Output Storage Module
Writes solution snapshots, time series and convergence tables as CSV files
"""

import logging
import os

import numpy as np
import pandas as pd

from src.monitoring.diagnostics import primitive_names
from src.physics.model import DEFAULT_H_MIN, conserved_to_primitive
from src.solver.mesh import MeshState

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.16e"
DEFAULT_OUTPUT_DIR = "output"


def ensure_output_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def snapshot_filename(index: int, t: float) -> str:
    return f"snapshot_{index:03d}_t{t:.6e}.csv"


def snapshot_frame(state: MeshState, h_min: float = DEFAULT_H_MIN) -> pd.DataFrame:
    """Primitive variables at every node, one row per node: x, h, u_m, alpha_i, b."""
    q = conserved_to_primitive(state.U, h_min).reshape(-1, state.U.shape[-1])
    frame = pd.DataFrame(q, columns=primitive_names(state.n_moments))
    frame.insert(0, "x", state.x_nodes.ravel())
    return frame


def write_frame(frame: pd.DataFrame, path: str) -> str:
    directory = os.path.dirname(path)
    if directory:
        ensure_output_dir(directory)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_snapshot(
    state: MeshState, output_dir: str, index: int, h_min: float = DEFAULT_H_MIN
) -> str:
    """
    Save one solution snapshot

    Args:
        state: Solution to write
        output_dir: Target directory (created when missing)
        index: Position of the snapshot in the run
        h_min: Dry threshold used for the primitive conversion

    Returns:
        str: Path of the written CSV file
    """
    path = os.path.join(output_dir, snapshot_filename(index, state.t))
    write_frame(snapshot_frame(state, h_min), path)
    logger.info(f"Snapshot {index} at t={state.t:.6g} saved to: {path}")
    return path


def read_snapshot(path: str) -> pd.DataFrame:
    return pd.read_csv(path)


def snapshot_times(t_end: float, count: int) -> list:
    """Equispaced output times ending at t_end; a single snapshot is t_end itself."""
    if count <= 1:
        return [float(t_end)]
    return [float(t) for t in np.linspace(0.0, t_end, count)]
