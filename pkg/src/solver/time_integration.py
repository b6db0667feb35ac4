"""
Time Integration Module
Five-stage fourth-order low-storage Runge-Kutta (Carpenter-Kennedy 2N
storage) with CFL step selection and exact snapshot hitting
"""

import logging
from typing import Callable, List, Optional

import numpy as np
from tqdm import tqdm

from src.physics.model import max_abs_eigenvalue
from src.solver.mesh import MeshState
from src.utils.config import PhysicsParams, TimeControls
from src.utils.errors import DryStateError

logger = logging.getLogger(__name__)

RK4A = np.array(
    [
        0.0,
        -567301805773.0 / 1357537059087.0,
        -2404267990393.0 / 2016746695238.0,
        -3550918686646.0 / 2091501179385.0,
        -1275806237668.0 / 842570457699.0,
    ]
)
RK4B = np.array(
    [
        1432997174477.0 / 9575080441755.0,
        5161836677717.0 / 13612068292357.0,
        1720146321549.0 / 2090206949498.0,
        3134564353537.0 / 4481467310338.0,
        2277821191437.0 / 14882151754819.0,
    ]
)
RK4C = np.array(
    [
        0.0,
        1432997174477.0 / 9575080441755.0,
        2526269341429.0 / 6820363962896.0,
        2006345519317.0 / 3224310063776.0,
        2802321613138.0 / 2924317926251.0,
    ]
)

RhsFn = Callable[[np.ndarray, float], np.ndarray]
StateCallback = Callable[[MeshState], None]

# steps within this relative distance of a target are stretched onto it
TARGET_SLACK = 1e-8


def low_storage_rk_step(U: np.ndarray, t: float, dt: float, rhs: RhsFn) -> np.ndarray:
    if dt <= 0.0:
        raise ValueError(f"time step must be positive, got {dt}")
    U = np.array(U, dtype=float, copy=True)
    du = np.zeros_like(U)
    for stage, (a, b, c) in enumerate(zip(RK4A, RK4B, RK4C)):
        try:
            k = rhs(U, t + c * dt)
        except DryStateError as e:
            raise e.with_context(time=t, stage=stage) from e
        du = a * du + dt * k
        U = U + b * du
    return U


def rk_step(state: MeshState, dt: float, rhs: RhsFn) -> MeshState:
    U = low_storage_rk_step(state.U, state.t, dt, rhs)
    return state.advanced(U, state.t + dt)


def cfl_dt(state: MeshState, p: PhysicsParams, cfl: float) -> float:
    """cfl * dx / ((2P+1) * max |lambda|)."""
    lam = float(np.max(max_abs_eigenvalue(state.U, p)))
    if lam <= 0.0:
        return np.inf
    return cfl * state.dx / ((2 * state.mesh.ops.P + 1) * lam)


def _targets(controls: TimeControls, t0: float) -> List[float]:
    times = [s for s in controls.snapshot_times if s > t0]
    if not times or times[-1] < controls.t_end:
        times.append(controls.t_end)
    return times


def integrate(
    state: MeshState,
    rhs: RhsFn,
    controls: TimeControls,
    p: PhysicsParams,
    on_snapshot: Optional[StateCallback] = None,
    on_step: Optional[StateCallback] = None,
    progress: bool = False,
) -> MeshState:
    """
    Advance to controls.t_end, landing exactly on every snapshot time.

    on_snapshot fires for each requested snapshot time (including t = 0 when
    requested); on_step fires after every accepted step.
    """
    snapshots = set(controls.snapshot_times)
    if on_snapshot is not None and state.t in snapshots:
        on_snapshot(state)

    steps = 0
    bar = tqdm(total=controls.t_end, disable=not progress, unit="s", leave=False)
    try:
        for target in _targets(controls, state.t):
            while state.t < target:
                dt = controls.dt_fixed or cfl_dt(state, p, controls.cfl)
                remaining = target - state.t
                if dt >= remaining * (1.0 - TARGET_SLACK):
                    new_state = rk_step(state, remaining, rhs).advanced_time(target)
                else:
                    new_state = rk_step(state, dt, rhs)
                bar.update(new_state.t - state.t)
                state = new_state
                steps += 1
                if on_step is not None:
                    on_step(state)
            if on_snapshot is not None and target in snapshots:
                on_snapshot(state)
    finally:
        bar.close()

    logger.debug(f"Reached t={state.t:.6g} after {steps} steps")
    return state
