"""
Scenario Definitions
Travelling wave with friction, friction dissipation study, manufactured
convergence test and the perturbed lake at rest over a Gaussian bump
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from src.moments.basis import MomentTensors
from src.scenarios import manufactured
from src.utils.config import (
    FrictionParams,
    PhysicsParams,
    SchemeConfig,
    ShockCaptureParams,
    TimeControls,
)
from src.utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

StateFn = Callable[[np.ndarray], np.ndarray]
ExactFn = Callable[[np.ndarray, float], np.ndarray]
SourceFn = Callable[[np.ndarray, float, MomentTensors, PhysicsParams], np.ndarray]
BoundSource = Callable[[np.ndarray, float], np.ndarray]

EXAMPLE4_LEVEL = 1.75
EXAMPLE4_PERTURBATION = 1e-3
TRAVELLING_WAVE_VELOCITY = 0.25
TRAVELLING_WAVE_ALPHA2 = -0.25


@dataclass(frozen=True)
class Scenario:
    name: str
    domain: Tuple[float, float]
    N: int
    P: int
    K: int
    initial_condition: StateFn
    bathymetry: StateFn
    scheme: SchemeConfig
    controls: TimeControls
    exact_solution: Optional[ExactFn] = None
    source: Optional[SourceFn] = None
    H0: Optional[float] = None

    def __post_init__(self):
        if not self.domain[0] < self.domain[1]:
            raise ConfigurationError(f"empty domain {self.domain} for {self.name}")

    @property
    def physics(self) -> PhysicsParams:
        return self.scheme.physics

    def bind_source(self, T: MomentTensors) -> Optional[BoundSource]:
        """Source as a function of (x, t) for the current physics."""
        if self.source is None:
            return None
        source, physics = self.source, self.physics

        def bound(x: np.ndarray, t: float) -> np.ndarray:
            return source(x, t, T, physics)

        return bound

    def with_overrides(
        self,
        cfl: Optional[float] = None,
        dt: Optional[float] = None,
        t_end: Optional[float] = None,
        flux_mode: Optional[str] = None,
        friction: Optional[str] = None,
        nu: Optional[float] = None,
        shock_capture: Optional[bool] = None,
        model: Optional[str] = None,
        workers: Optional[int] = None,
    ) -> "Scenario":
        """Copy with scheme and time-control fields replaced; None keeps the scenario default."""
        physics = self.physics
        friction_update = {}
        if friction is not None:
            friction_update["kind"] = friction
        if nu is not None:
            friction_update["nu"] = nu
        if friction_update:
            physics = physics.model_copy(
                update={"friction": physics.friction.model_copy(update=friction_update)}
            )
        if model is not None:
            physics = physics.model_copy(update={"model": model})

        scheme_update = {"physics": physics}
        if flux_mode is not None:
            scheme_update["flux_mode"] = flux_mode
        if shock_capture is not None:
            scheme_update["shock_capture"] = self.scheme.shock_capture.model_copy(
                update={"enabled": shock_capture}
            )
        if workers is not None:
            scheme_update["workers"] = workers
        if friction is not None and self.scheme.source != "manufactured":
            scheme_update["source"] = "none" if friction == "none" else "friction"
        scheme = self.scheme.model_copy(update=scheme_update)

        controls_update = {}
        if cfl is not None:
            controls_update["cfl"] = cfl
        if dt is not None:
            controls_update["dt_fixed"] = dt
        if t_end is not None:
            controls_update["t_end"] = t_end
            controls_update["snapshot_times"] = [
                s for s in self.controls.snapshot_times if s <= t_end
            ]
        controls = self.controls.model_copy(update=controls_update)

        # model_copy skips validation
        try:
            scheme = SchemeConfig.model_validate(scheme.model_dump())
            controls = TimeControls.model_validate(controls.model_dump())
        except ValueError as e:
            raise ConfigurationError(f"Invalid override for {self.name}: {e}") from e
        return replace(self, scheme=scheme, controls=controls)


def _travelling_wave(N: int) -> StateFn:
    def ic(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        h = 1.0 + np.exp(3.0 * np.cos(np.pi * (x + 0.5)) - 4.0)
        U = np.zeros(x.shape + (N + 3,))
        U[..., 0] = h
        U[..., 1] = TRAVELLING_WAVE_VELOCITY * h
        if N >= 2:
            U[..., 3] = TRAVELLING_WAVE_ALPHA2 * h
        return U

    return ic


def _flat_bottom(x: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(x, dtype=float))


def scenario_example1(N: int = 2, P: int = 2, K: int = 256) -> Scenario:
    """Travelling water wave with Newtonian slip friction, g = 1."""
    physics = PhysicsParams(
        g=1.0,
        model="swme",
        friction=FrictionParams(kind="slip", nu=0.1, slip_length=0.1),
    )
    scheme = SchemeConfig(
        physics=physics,
        flux_mode="es",
        shock_capture=ShockCaptureParams(enabled=True),
        source="friction",
    )
    return Scenario(
        name="example1",
        domain=(-1.0, 1.0),
        N=N,
        P=P,
        K=K,
        initial_condition=_travelling_wave(N),
        bathymetry=_flat_bottom,
        scheme=scheme,
        controls=TimeControls(cfl=0.9, t_end=2.0),
    )


def scenario_example2(
    friction: str = "slip", nu: float = 0.1, N: int = 2, P: int = 2, K: int = 256
) -> Scenario:
    """Example-1 wave under the linearized model with slip or Manning friction, g = 9.81."""
    if friction not in ("slip", "manning"):
        raise ConfigurationError(f"example2 needs slip or manning friction, got '{friction}'")
    if nu <= 0.0:
        raise ConfigurationError(f"example2 needs nu > 0, got {nu}")
    physics = PhysicsParams(
        g=9.81,
        model="swlme",
        friction=FrictionParams(
            kind=friction, nu=nu, slip_length=0.1, manning_n=0.0165, rho=1000.0
        ),
    )
    scheme = SchemeConfig(
        physics=physics,
        flux_mode="es",
        shock_capture=ShockCaptureParams(enabled=True),
        source="friction",
    )
    return Scenario(
        name="example2",
        domain=(-1.0, 1.0),
        N=N,
        P=P,
        K=K,
        initial_condition=_travelling_wave(N),
        bathymetry=_flat_bottom,
        scheme=scheme,
        controls=TimeControls(cfl=0.9, t_end=2.0),
    )


def _is_power_of_two(K: int) -> bool:
    return K >= 1 and (K & (K - 1)) == 0


def scenario_example3(model: str = "swme", K: int = 64, N: int = 2, P: int = 3) -> Scenario:
    """Manufactured smooth solution on [0, sqrt(2)] for convergence studies."""
    if not _is_power_of_two(K):
        raise ConfigurationError(f"example3 needs a power-of-two element count, got {K}")
    physics = PhysicsParams(g=9.81, model=model)
    scheme = SchemeConfig(physics=physics, flux_mode="es", source="manufactured")

    def ic(x: np.ndarray) -> np.ndarray:
        return manufactured.exact_solution(x, 0.0, N)

    def exact(x: np.ndarray, t: float) -> np.ndarray:
        return manufactured.exact_solution(x, t, N)

    return Scenario(
        name="example3",
        domain=manufactured.DOMAIN,
        N=N,
        P=P,
        K=K,
        initial_condition=ic,
        bathymetry=manufactured.bathymetry,
        scheme=scheme,
        controls=TimeControls(cfl=0.9, t_end=0.05, dt_fixed=1e-5),
        exact_solution=exact,
        source=manufactured.manufactured_source,
    )


def gaussian_bump(x: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * np.asarray(x, dtype=float) ** 2)


def velocity_perturbation(x: np.ndarray) -> np.ndarray:
    """-1e-3 on [-1, 0), +1e-3 on [0, 1], zero elsewhere."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    out[(x >= -1.0) & (x < 0.0)] = -EXAMPLE4_PERTURBATION
    out[(x >= 0.0) & (x <= 1.0)] = EXAMPLE4_PERTURBATION
    return out


def scenario_example4(
    well_balanced: bool = True,
    perturbed: bool = True,
    degree: int = 1,
    K: int = 64,
    N: int = 2,
) -> Scenario:
    """Lake at rest over a Gaussian bump, optionally with a small velocity and moment kick."""
    physics = PhysicsParams(g=9.812, model="swme")
    scheme = SchemeConfig(
        physics=physics,
        flux_mode="es" if well_balanced else "rusanov",
        shock_capture=ShockCaptureParams(enabled=True),
    )

    def ic(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        b = gaussian_bump(x)
        h = EXAMPLE4_LEVEL - b
        kick = velocity_perturbation(x) if perturbed else np.zeros_like(x)
        U = np.zeros(x.shape + (N + 3,))
        U[..., 0] = h
        U[..., 1] = h * kick
        U[..., 2 : N + 2] = (h * kick)[..., None]
        U[..., N + 2] = b
        return U

    return Scenario(
        name="example4",
        domain=(-4.0, 4.0),
        N=N,
        P=degree,
        K=K,
        initial_condition=ic,
        bathymetry=gaussian_bump,
        scheme=scheme,
        controls=TimeControls(cfl=0.9, t_end=8000.0),
        H0=EXAMPLE4_LEVEL,
    )


SCENARIOS: Dict[str, Callable[..., Scenario]] = {
    "example1": scenario_example1,
    "example2": scenario_example2,
    "example3": scenario_example3,
    "example4": scenario_example4,
}


def get_scenario(name: str, **kwargs) -> Scenario:
    """Build a registered scenario; keyword arguments go to its constructor."""
    try:
        factory = SCENARIOS[name]
    except KeyError:
        raise ConfigurationError(
            f"Unknown scenario '{name}', expected one of {sorted(SCENARIOS)}"
        ) from None
    if name == "example4" and "P" in kwargs:
        kwargs["degree"] = kwargs.pop("P")
    try:
        scenario = factory(**kwargs)
    except TypeError as e:
        raise ConfigurationError(f"Bad parameters for {name}: {e}") from e
    logger.debug(f"Scenario {name} built with N={scenario.N}, P={scenario.P}, K={scenario.K}")
    return scenario
