"""Pipeline configuration and its stable digest.

Every default below is the reference hyperparameter for the Port Hueneme UF data.
The config file is a JSON document whose keys mirror :class:`PipelineConfig`;
unknown keys are rejected so that typos do not silently fall back to defaults.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping


class ConfigError(ValueError):
    """Invalid or incomplete configuration (CLI exit code 1)."""


class DataError(ValueError):
    """Input data cannot be turned into a result (CLI exit code 2)."""


REQUIRED_CHANNELS = (
    "timestamp",
    "feed_pressure",
    "filtrate_pressure",
    "filtrate_flow",
    "temperature",
    "backwash_flow",
)


@dataclass(frozen=True)
class ColumnMapping:
    """Binds each semantic channel to a column name in the input file.

    ``None`` means the channel is unmapped; parsing then fails loudly. Units
    are psi for pressures, GPM for flows and degrees Celsius for temperature.
    No conversion is performed.
    """

    timestamp: str | None = "time"
    feed_pressure: str | None = "feed_pressure"
    filtrate_pressure: str | None = "filtrate_pressure"
    filtrate_flow: str | None = "filtrate_flow"
    temperature: str | None = "temperature"
    backwash_flow: str | None = "backwash_flow"

    def require(self) -> dict[str, str]:
        out = {}
        for name in REQUIRED_CHANNELS:
            col = getattr(self, name)
            if not col:
                raise ConfigError(f"{name} unmapped")
            out[name] = col
        return out


@dataclass(frozen=True)
class HealthWeights:
    w_resistance: float = 0.30
    w_tmp: float = 0.25
    w_flux: float = 0.30
    w_recovery: float = 0.15

    def __post_init__(self):
        ws = self.as_tuple()
        if any(not math.isfinite(w) or w < 0 for w in ws):
            raise ConfigError(f"health weights must be finite and >= 0, got {ws}")
        if abs(math.fsum(ws) - 1.0) > 1e-12:
            raise ConfigError(f"health weights must sum to 1, got {math.fsum(ws)!r}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w_resistance, self.w_tmp, self.w_flux, self.w_recovery)


@dataclass(frozen=True)
class PipelineConfig:
    mapping: ColumnMapping = field(default_factory=ColumnMapping)
    delimiter: str = ","
    # segmentation
    backwash_threshold_gpm: float = 15.0
    min_cycle_samples: int = 3
    hi_jump: float = 0.5
    max_gap_hours: float = 24.0
    failure_hi: float = 0.01
    # features
    weights: HealthWeights = field(default_factory=HealthWeights)
    eps: float = 1e-9
    constant_feature_value: float = 0.0
    # fuzzy / prognosis
    hi_range: tuple[float, float] = (0.0, 1.0)
    dhi_range: tuple[float, float] = (-1.0, 1.0)
    window_length: int = 20
    top_k: int = 10
    interval_level: float = 0.8
    # evaluation
    train_fraction: float = 0.8
    exclude_same_run: bool = True
    # simulation
    seed: int = 0

    def __post_init__(self):
        if self.backwash_threshold_gpm <= 0:
            raise ConfigError("backwash_threshold_gpm must be > 0")
        if self.min_cycle_samples < 1:
            raise ConfigError("min_cycle_samples must be >= 1")
        if self.eps <= 0:
            raise ConfigError("eps must be > 0")
        if self.window_length < 1:
            raise ConfigError("window_length must be >= 1")
        if self.top_k < 1:
            raise ConfigError("top_k must be >= 1")
        if not 0.0 < self.interval_level < 1.0:
            raise ConfigError("interval_level must lie in (0, 1)")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must lie in (0, 1)")
        for name in ("hi_range", "dhi_range"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ConfigError(f"{name} must satisfy lo < hi, got {(lo, hi)}")
        if len(self.delimiter) != 1:
            raise ConfigError("delimiter must be a single character")

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["hi_range"] = list(self.hi_range)
        d["dhi_range"] = list(self.dhi_range)
        return d

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PipelineConfig":
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            if "mapping" in data:
                data["mapping"] = ColumnMapping(**data["mapping"])
            if "weights" in data:
                data["weights"] = HealthWeights(**data["weights"])
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        for name in ("hi_range", "dhi_range"):
            if name in data:
                data[name] = tuple(float(v) for v in data[name])
        return cls(**data)

    def replace(self, **changes: Any) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    def digest(self) -> str:
        return config_digest(self)


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_digest(config: PipelineConfig) -> str:
    """First 16 hex chars of the SHA-256 of the canonical JSON config."""
    return hashlib.sha256(canonical_json(config.to_dict()).encode()).hexdigest()[:16]


def load_config(path: str | Path | None, **overrides: Any) -> PipelineConfig:
    """Read a JSON config file (optional) and apply non-None overrides."""
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return PipelineConfig.from_dict(data)
