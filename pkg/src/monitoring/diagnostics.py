"""
Solution Diagnostics Module
Quadrature functionals over the nodal solution: entropy, mass, friction
dissipation, L2 errors, convergence rates and the lake-at-rest error
"""

import logging
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from src.moments.basis import MomentTensors
from src.physics.model import entropy, entropy_vars, friction_source, total_water_height
from src.solver.mesh import MeshState, evaluate_at
from src.utils.config import PhysicsParams

logger = logging.getLogger(__name__)

ExactSolution = Callable[[np.ndarray, float], np.ndarray]

TIME_SERIES_CHANNELS = ("total_entropy", "total_mass", "dissipation_rate", "lake_at_rest_error")


def component_names(N: int) -> List[str]:
    return ["h", "hu"] + [f"halpha_{i}" for i in range(1, N + 1)] + ["b"]


def primitive_names(N: int) -> List[str]:
    return ["h", "u_m"] + [f"alpha_{i}" for i in range(1, N + 1)] + ["b"]


def total_entropy(state: MeshState, p: PhysicsParams) -> float:
    return float(state.mesh.integrate(entropy(state.U, p)))


def total_mass(state: MeshState) -> float:
    return float(state.mesh.integrate(state.U[..., 0]))


def entropy_dissipation_rate(state: MeshState, T: MomentTensors, p: PhysicsParams) -> float:
    """
    Domain-averaged entropy production of the friction source.

    Args:
        state: Current solution
        T: Moment tensors matching the state's N
        p: Physics parameters with the friction law

    Returns:
        float: (1/|Omega|) * integral of w . S, nonpositive for both friction laws
    """
    if p.friction.kind == "none":
        return 0.0
    w = entropy_vars(state.U, p)
    S = friction_source(state.U, T, p)
    return float(state.mesh.integrate(np.sum(w * S, axis=-1)) / state.mesh.length)


def l2_error(state: MeshState, exact: ExactSolution, t: Optional[float] = None) -> np.ndarray:
    """Per-component discrete L2 error against exact(x, t) at the LGL nodes."""
    t = state.t if t is None else t
    reference = np.asarray(exact(state.x_nodes, t), dtype=float)
    diff = state.U - reference
    return np.sqrt(state.mesh.integrate(diff * diff))


def convergence_rates(
    errors: Mapping[int, Sequence[float]], names: Optional[List[str]] = None
) -> pd.DataFrame:
    """
    Table of errors and observed rates log2(e_coarse / e_fine) per component.

    Args:
        errors: Element count -> per-component error vector
        names: Component names (defaults to e0, e1, ...)

    Returns:
        pd.DataFrame: One row per K with columns e_<name> and rate_<name>;
        the coarsest row has empty rates. A zero fine error gives +inf.
    """
    Ks = sorted(errors)
    table = np.array([np.asarray(errors[K], dtype=float) for K in Ks])
    if names is None:
        names = [f"e{i}" for i in range(table.shape[1])]

    frame = pd.DataFrame({"K": Ks})
    for j, name in enumerate(names):
        frame[f"e_{name}"] = table[:, j]
    for j, name in enumerate(names):
        rates = [np.nan]
        for row in range(1, len(Ks)):
            coarse, fine = table[row - 1, j], table[row, j]
            ratio = Ks[row] / Ks[row - 1]
            if fine == 0.0:
                rates.append(np.inf)
            else:
                rates.append(np.log(coarse / fine) / np.log(ratio))
        frame[f"rate_{name}"] = rates
    return frame


def lake_at_rest_error(state: MeshState, H0: float) -> float:
    """max |h + b - H0| over all nodes."""
    return float(np.max(np.abs(total_water_height(state.U) - H0)))


def self_convergence(states: Sequence[MeshState]) -> List[float]:
    """
    Successive differences of a refinement ladder.

    Every member is interpolated onto the nodes of the last (finest) one; entry
    j is the largest component L2 norm of member j+1 minus member j.
    """
    if len(states) < 2:
        raise ValueError("self-convergence needs at least two solutions")
    finest = states[-1]
    x = finest.x_nodes.ravel()
    shape = finest.U.shape
    sampled = [evaluate_at(s, x).reshape(shape) for s in states]

    differences = []
    for coarse, fine in zip(sampled, sampled[1:]):
        diff = fine - coarse
        differences.append(float(np.max(np.sqrt(finest.mesh.integrate(diff * diff)))))
    return differences


class TimeSeries:
    """Scalar channels sampled at strictly increasing times."""

    def __init__(self, channels: Sequence[str] = TIME_SERIES_CHANNELS):
        self.channels = list(channels)
        self.times: List[float] = []
        self.values: Dict[str, List[float]] = {name: [] for name in self.channels}

    def __len__(self) -> int:
        return len(self.times)

    def append(self, t: float, **values: float) -> None:
        if self.times and t <= self.times[-1]:
            raise ValueError(f"time {t} does not follow {self.times[-1]}")
        unknown = set(values) - set(self.channels)
        if unknown:
            raise ValueError(f"Unknown channels: {sorted(unknown)}")
        self.times.append(float(t))
        for name in self.channels:
            self.values[name].append(float(values.get(name, np.nan)))

    def last(self, channel: str) -> float:
        return self.values[channel][-1]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"t": self.times})
        for name in self.channels:
            frame[name] = self.values[name]
        return frame

    def to_csv(self, path: str) -> str:
        self.to_frame().to_csv(path, index=False, float_format="%.16e")
        logger.info(f"Time series with {len(self)} samples written to {path}")
        return path


def sample_diagnostics(
    state: MeshState, T: MomentTensors, p: PhysicsParams, H0: Optional[float] = None
) -> Dict[str, float]:
    """All time-series channels for one state."""
    return {
        "total_entropy": total_entropy(state, p),
        "total_mass": total_mass(state),
        "dissipation_rate": entropy_dissipation_rate(state, T, p),
        "lake_at_rest_error": np.nan if H0 is None else lake_at_rest_error(state, H0),
    }
