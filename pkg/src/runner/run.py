"""
Scenario Runner Module
Builds a scenario from the run configuration, integrates it, and writes
snapshots, time series and convergence tables
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.moments.basis import build_tensors, dump_tensors_csv
from src.monitoring.diagnostics import (
    TimeSeries,
    component_names,
    convergence_rates,
    l2_error,
    sample_diagnostics,
    self_convergence,
)
from src.runner import storage, tracking
from src.scenarios.examples import Scenario, get_scenario
from src.solver.dgsem import Semidiscretization
from src.solver.mesh import Mesh, MeshState, project_initial_condition
from src.solver.operators import build_operators
from src.solver.time_integration import integrate
from src.utils.config import RunConfig
from src.utils.errors import ConfigurationError, SolverError

logger = logging.getLogger(__name__)

THREADS_ENV = "SWME_DG_THREADS"
DEFAULT_SNAPSHOT_COUNT = 5
# time-series samples between snapshots, counted in accepted steps
SAMPLE_EVERY = 10


@dataclass
class RunResult:
    scenario: Scenario
    state: MeshState
    timeseries: TimeSeries
    snapshot_paths: List[str] = field(default_factory=list)
    errors: Optional[np.ndarray] = None
    output_dir: Optional[str] = None
    steps: int = 0

    def summary(self) -> Dict[str, float]:
        metrics = {
            "t": self.state.t,
            "steps": self.steps,
            "total_entropy": self.timeseries.last("total_entropy"),
            "total_mass": self.timeseries.last("total_mass"),
            "dissipation_rate": self.timeseries.last("dissipation_rate"),
            "lake_at_rest_error": self.timeseries.last("lake_at_rest_error"),
        }
        if self.errors is not None:
            for name, value in zip(component_names(self.state.n_moments), self.errors):
                metrics[f"l2_{name}"] = float(value)
        return metrics


def worker_count() -> int:
    """Element-parallel workers from SWME_DG_THREADS (default 1)."""
    raw = os.getenv(THREADS_ENV)
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigurationError(f"{THREADS_ENV} must be an integer, got '{raw}'") from None
    if value < 1:
        raise ConfigurationError(f"{THREADS_ENV} must be positive, got {value}")
    return value


def build_scenario(cfg: RunConfig, K: Optional[int] = None) -> Scenario:
    """Resolve the scenario named in cfg and apply every override (K wins over cfg)."""
    o = cfg.overrides
    kwargs = {"N": o.N, "P": o.P, "K": K if K is not None else o.K}
    name = cfg.scenario
    later = {"friction": o.friction, "nu": o.nu, "model": o.model}
    if name == "example2":
        kwargs.update(friction=o.friction, nu=o.nu)
        later.update(friction=None, nu=None)
    if name == "example3":
        kwargs["model"] = o.model
        later["model"] = None
    if name == "example4":
        kwargs["well_balanced"] = o.well_balanced
    elif o.well_balanced is not None:
        raise ConfigurationError("--well-balanced only applies to example4")

    scenario = get_scenario(name, **{k: v for k, v in kwargs.items() if v is not None})
    return scenario.with_overrides(
        cfl=o.cfl,
        dt=o.dt,
        t_end=o.t_end,
        flux_mode=o.flux_mode,
        shock_capture=o.shock_capture,
        workers=worker_count(),
        **later,
    )


def simulate(
    scenario: Scenario,
    snapshot_times: Sequence[float] = (),
    on_snapshot=None,
    progress: bool = False,
) -> RunResult:
    """Integrate a scenario in memory; snapshots are handed to on_snapshot."""
    ops = build_operators(scenario.P)
    mesh = Mesh(scenario.domain[0], scenario.domain[1], scenario.K, ops)
    tensors = build_tensors(scenario.N)
    physics = scenario.physics
    solver = Semidiscretization(mesh, tensors, scenario.scheme, scenario.bind_source(tensors))
    controls = scenario.controls.model_copy(update={"snapshot_times": list(snapshot_times)})

    state = project_initial_condition(scenario.initial_condition, mesh, physics.h_min)
    series = TimeSeries()
    counter = {"steps": 0}

    def record(s: MeshState) -> None:
        if series.times and s.t <= series.times[-1]:
            return
        series.append(s.t, **sample_diagnostics(s, tensors, physics, scenario.H0))

    def step(s: MeshState) -> None:
        counter["steps"] += 1
        if counter["steps"] % SAMPLE_EVERY == 0:
            record(s)

    def snapshot(s: MeshState) -> None:
        record(s)
        if on_snapshot is not None:
            on_snapshot(s)

    record(state)
    state = integrate(
        state,
        solver,
        controls,
        physics,
        on_snapshot=snapshot,
        on_step=step,
        progress=progress,
    )
    record(state)

    errors = None
    if scenario.exact_solution is not None:
        errors = l2_error(state, scenario.exact_solution)
    return RunResult(
        scenario=scenario,
        state=state,
        timeseries=series,
        errors=errors,
        steps=counter["steps"],
    )


def _run_params(cfg: RunConfig, scenario: Scenario) -> Dict[str, object]:
    return {
        "scenario": scenario.name,
        "N": scenario.N,
        "P": scenario.P,
        "K": scenario.K,
        "model": scenario.physics.model,
        "flux_mode": scenario.scheme.flux_mode,
        "friction": scenario.physics.friction.kind,
        "nu": scenario.physics.friction.nu,
        "shock_capture": scenario.scheme.shock_capture.enabled,
        "cfl": scenario.controls.cfl,
        "dt": scenario.controls.dt_fixed,
        "t_end": scenario.controls.t_end,
        "seed": cfg.seed,
    }


def run_scenario(cfg: RunConfig, progress: bool = False) -> RunResult:
    """
    Run one scenario and write its outputs.

    Snapshots land in <output_dir>/snapshot_XXX_t<time>.csv and the
    diagnostics in <output_dir>/timeseries.csv.
    """
    try:
        scenario = build_scenario(cfg)
        output_dir = storage.ensure_output_dir(
            cfg.overrides.output_dir or storage.DEFAULT_OUTPUT_DIR
        )
        count = cfg.overrides.snapshot_count or DEFAULT_SNAPSHOT_COUNT
        times = storage.snapshot_times(scenario.controls.t_end, count)
        logger.info(
            f"Running {scenario.name}: N={scenario.N}, P={scenario.P}, K={scenario.K}, "
            f"flux={scenario.scheme.flux_mode}, t_end={scenario.controls.t_end}"
        )

        if cfg.dump_tensors:
            dump_tensors_csv(build_tensors(scenario.N), cfg.dump_tensors)

        paths: List[str] = []

        def write(s: MeshState) -> None:
            paths.append(
                storage.write_snapshot(s, output_dir, len(paths), scenario.physics.h_min)
            )

        result = simulate(scenario, times, on_snapshot=write, progress=progress)
        result.snapshot_paths = paths
        result.output_dir = output_dir
        result.timeseries.to_csv(os.path.join(output_dir, "timeseries.csv"))
        logger.info(f"{scenario.name} finished after {result.steps} steps")

        if cfg.tracking.enabled:
            tracking.log_run(
                _run_params(cfg, scenario),
                result.summary(),
                output_dir,
                cfg.tracking.experiment_name,
                run_name=scenario.name,
            )
        return result
    except SolverError as e:
        logger.error(f"Run of {cfg.scenario} failed: {str(e)}")
        raise


def _check_ladder(K_list: Sequence[int]) -> List[int]:
    K_list = [int(K) for K in K_list]
    if not K_list:
        raise ConfigurationError("convergence study needs at least one element count")
    if any(b <= a for a, b in zip(K_list, K_list[1:])):
        raise ConfigurationError(f"element counts must be strictly increasing: {K_list}")
    if any(K < 1 or K & (K - 1) for K in K_list):
        raise ConfigurationError(f"element counts must be powers of two: {K_list}")
    return K_list


def run_convergence(
    cfg: RunConfig, K_list: Sequence[int], progress: bool = False
) -> pd.DataFrame:
    """
    Refinement study over K_list.

    example3 compares against the exact solution and reports per-component
    errors and rates; any other scenario reports self-convergence
    differences between consecutive meshes.
    """
    K_list = _check_ladder(K_list)
    output_dir = storage.ensure_output_dir(
        cfg.overrides.output_dir or storage.DEFAULT_OUTPUT_DIR
    )
    try:
        results = []
        for K in K_list:
            scenario = build_scenario(cfg, K=K)
            logger.info(f"Convergence level K={K} for {scenario.name}")
            results.append(simulate(scenario, progress=progress))

        scenario = results[0].scenario
        if scenario.exact_solution is not None:
            # the bottom is never evolved, its error is identically zero
            errors = {K: r.errors[:-1] for K, r in zip(K_list, results)}
            table = convergence_rates(errors, component_names(scenario.N)[:-1])
            path = os.path.join(output_dir, f"convergence_{scenario.physics.model}.csv")
        else:
            differences = []
            if len(results) > 1:
                differences = self_convergence([r.state for r in results])
            table = pd.DataFrame({"K": K_list, "difference": [np.nan] + differences})
            path = os.path.join(output_dir, f"self_convergence_{scenario.name}.csv")

        storage.write_frame(table, path)
        logger.info(f"Convergence table saved to: {path}")
        return table
    except SolverError as e:
        logger.error(f"Convergence study of {cfg.scenario} failed: {str(e)}")
        raise
