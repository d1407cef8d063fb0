"""Experiment configuration schema (YAML on disk).

Every section is optional; missing values take the defaults below, which
mirror the published tuning study at desk scale. Unknown keys are errors.
"""

from pathlib import Path
from typing import List, Literal, Optional, Tuple

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

__all__ = [
    "ConfigError",
    "GeometryConfig",
    "SignalConfig",
    "PriorConfig",
    "MetricsConfig",
    "SweepConfig",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "dump_config",
]


class ConfigError(ValueError):
    """Raised for unreadable or invalid configuration files."""


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


Vec3 = Tuple[float, float, float]


class GeometryConfig(_Section):
    electrode_count: int = Field(64, ge=2)
    scalp_radius: float = Field(0.09, gt=0)
    brain_radius: float = Field(0.078, gt=0)
    node_spacing: float = Field(0.012, gt=0)
    # keep the source space under the electrode cap; null = full sphere
    min_z: Optional[float] = Field(0.0, le=0)
    conductivity: float = Field(0.33, gt=0)


class SignalConfig(_Section):
    timing: Literal["caption", "prose"] = "caption"
    dt: float = Field(1e-4, gt=0)
    amplitude: float = Field(10.0, gt=0)
    amplitude_unit: Literal["nA*m", "uA*m", "A*m"] = "nA*m"
    sources: Literal["both", "deep", "superficial"] = "both"
    deep_position: Vec3 = (-0.012, 0.0, 0.012)
    deep_moment: Vec3 = (0.0, 0.0, 1.0)
    superficial_position: Vec3 = (-0.036, 0.0, 0.06)
    superficial_moment: Vec3 = (0.0, 1.0, 0.0)


class PriorConfig(_Section):
    # "relative": sigma in theta0 is noise_std / max|clean| (dimensionless)
    # "absolute": sigma is the noise std in volts
    noise_scale: Literal["relative", "absolute"] = "relative"
    weights_from: Literal["filter", "smoothed"] = "filter"


class MetricsConfig(_Section):
    deep_region_radius: float = Field(0.015, gt=0)


class SweepConfig(_Section):
    ep_snr_db: List[float] = Field(default_factory=lambda: [0.0, 20.0], min_length=1)
    pm_snr_db: List[float] = Field(default_factory=lambda: [0.0, 20.0], min_length=1)
    noise_db: List[float] = Field(default_factory=lambda: [10.0, 20.0, 30.0], min_length=1)
    alpha: List[float] = Field(default_factory=lambda: [0.5, 1.0, 1.25, 1.5], min_length=1)
    smoothing: List[bool] = Field(default_factory=lambda: [False, True], min_length=1)

    @field_validator("alpha")
    @classmethod
    def _positive_alpha(cls, v):
        if any(a <= 0 for a in v):
            raise ValueError("standardization exponents must be positive")
        return v


class ExperimentConfig(_Section):
    geometry: GeometryConfig = GeometryConfig()
    signal: SignalConfig = SignalConfig()
    prior: PriorConfig = PriorConfig()
    metrics: MetricsConfig = MetricsConfig()
    sweep: SweepConfig = SweepConfig()
    repetitions: int = Field(5, ge=1)
    base_seed: int = Field(20240617, ge=0, lt=2 ** 64)
    output_dir: str = "results"

    def with_overrides(self, **kwargs):
        return self.model_copy(update={k: v for k, v in kwargs.items() if v is not None})


def _format_errors(err):
    lines = []
    for e in err.errors():
        path = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{path}: {e['msg']}")
    return "invalid configuration:\n  " + "\n  ".join(lines)


def parse_config(data):
    """Validate a mapping (already parsed from YAML)."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("invalid configuration:\n  <root>: expected a mapping")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_errors(err)) from None


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"cannot parse config {path}: {err}") from None
    return parse_config(data)


def dump_config(config):
    data = config.model_dump(mode="json")
    return yaml.safe_dump(data, sort_keys=False)
