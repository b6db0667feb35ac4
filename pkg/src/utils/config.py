"""
Configuration Module
Validated parameter models for the physics, the scheme and the CLI runs,
plus the YAML loader for config.yml
"""

import logging
from typing import List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = "config.yml"

ModelVariant = Literal["swme", "swlme"]
FluxMode = Literal["ec", "es", "rusanov"]
FrictionKind = Literal["none", "slip", "manning"]
SourceKind = Literal["none", "friction", "manufactured"]


class FrictionParams(BaseModel):
    """Bottom/bulk friction. `nu` scales the bulk term for both laws."""

    model_config = ConfigDict(frozen=True)

    kind: FrictionKind = "none"
    nu: float = Field(0.0, ge=0.0)
    slip_length: float = Field(0.1, gt=0.0)
    manning_n: float = Field(0.0165, ge=0.0)
    rho: float = Field(1000.0, gt=0.0)


class PhysicsParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    g: float = Field(9.81, gt=0.0)
    model: ModelVariant = "swme"
    friction: FrictionParams = FrictionParams()
    h_min: float = Field(1e-10, gt=0.0)

    @property
    def nonlinear_moments(self) -> bool:
        return self.model == "swme"


class ShockCaptureParams(BaseModel):
    """Subcell blending controls (modal indicator on u_m^3)."""

    model_config = ConfigDict(frozen=True)

    enabled: bool = False
    alpha_max: float = Field(0.5, ge=0.0, le=1.0)
    alpha_min: float = Field(1e-3, ge=0.0, le=1.0)
    threshold_scale: float = Field(0.5, gt=0.0)
    threshold_exponent: float = Field(1.8, gt=0.0)
    smooth: bool = True


class SchemeConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    physics: PhysicsParams = PhysicsParams()
    flux_mode: FluxMode = "es"
    shock_capture: ShockCaptureParams = ShockCaptureParams()
    boundary: Literal["periodic"] = "periodic"
    source: SourceKind = "none"
    workers: int = Field(1, ge=1)


class TimeControls(BaseModel):
    model_config = ConfigDict(frozen=True)

    cfl: float = Field(0.9, gt=0.0)
    t_end: float = Field(..., ge=0.0)
    dt_fixed: Optional[float] = Field(None, gt=0.0)
    snapshot_times: List[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check_snapshots(self) -> "TimeControls":
        times = self.snapshot_times
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("snapshot_times must be strictly increasing")
        if times and (times[0] < 0.0 or times[-1] > self.t_end):
            raise ValueError("snapshot_times must lie in [0, t_end]")
        return self


class RunOverrides(BaseModel):
    """Per-run overrides; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    N: Optional[int] = Field(None, ge=1)
    P: Optional[int] = Field(None, ge=1)
    K: Optional[int] = Field(None, ge=1)
    cfl: Optional[float] = Field(None, gt=0.0)
    dt: Optional[float] = Field(None, gt=0.0)
    t_end: Optional[float] = Field(None, ge=0.0)
    flux_mode: Optional[FluxMode] = None
    friction: Optional[FrictionKind] = None
    nu: Optional[float] = Field(None, ge=0.0)
    shock_capture: Optional[bool] = None
    output_dir: Optional[str] = None
    snapshot_count: Optional[int] = Field(None, ge=1)
    model: Optional[ModelVariant] = None
    well_balanced: Optional[bool] = None


class TrackingConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    enabled: bool = False
    experiment_name: str = "SWME DG Runs"


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: str = "example1"
    overrides: RunOverrides = RunOverrides()
    seed: int = 42
    tracking: TrackingConfig = TrackingConfig()
    dump_tensors: Optional[str] = None

    def with_overrides(self, **values) -> "RunConfig":
        """Return a copy where every non-None value replaces the stored override (flags win)."""
        merged = self.overrides.model_dump()
        merged.update({k: v for k, v in values.items() if v is not None})
        try:
            overrides = RunOverrides(**merged)
        except ValidationError as e:
            raise ConfigurationError(str(e)) from e
        return self.model_copy(update={"overrides": overrides})

    def to_dict(self) -> dict:
        data = {
            "run": {"scenario": self.scenario, "seed": self.seed},
            "overrides": self.overrides.model_dump(exclude_none=True),
            "tracking": self.tracking.model_dump(),
        }
        if self.dump_tensors is not None:
            data["run"]["dump_tensors"] = self.dump_tensors
        return data

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: Optional[dict]) -> "RunConfig":
        data = data or {}
        unknown = set(data) - {"run", "overrides", "tracking"}
        if unknown:
            raise ConfigurationError(f"Unknown config sections: {sorted(unknown)}")
        run = data.get("run") or {}
        try:
            return cls(
                **run,
                overrides=RunOverrides(**(data.get("overrides") or {})),
                tracking=TrackingConfig(**(data.get("tracking") or {})),
            )
        except (ValidationError, TypeError) as e:
            raise ConfigurationError(f"Invalid configuration: {e}") from e

    @classmethod
    def from_yaml(cls, text: str) -> "RunConfig":
        return cls.from_dict(yaml.safe_load(text))


def load_config(path: str = DEFAULT_CONFIG_PATH) -> RunConfig:
    """Read a YAML run configuration."""
    logger.debug(f"Loading configuration from {path}")
    with open(path, "r") as config_file:
        return RunConfig.from_dict(yaml.safe_load(config_file))
