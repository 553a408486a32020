"""
Experiment configuration: a single JSON document per scenario.

Unknown keys are rejected; the accepted keys are documented in
docs/config-schema.json. CLI flags are applied on top with
`ExperimentConfig.override`, so precedence is flags > file > defaults.
"""

import dataclasses
import json
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

from trulr.boundaries import DEFAULT_PILOT_SIZE
from trulr.exceptions import ConfigError
from trulr.harness.registry import LabeledEstimator, parse_estimator_code
from trulr.models.enums import Family, OutputKind

REQUIRED_KEYS = (
    "scenario_id",
    "family",
    "behavior_params",
    "target_params",
    "estimators",
    "alpha",
    "n_grid",
    "delta",
    "reps",
    "seed",
)


def _params(value):
    if isinstance(value, dict):
        return dict(value)
    return tuple(value)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario_id: str
    family: Family
    behavior_params: Any
    target_params: Any
    estimators: Tuple[LabeledEstimator, ...]
    alpha: float
    n_grid: Tuple[int, ...]
    delta: float
    reps: int
    seed: int
    h: OutputKind = OutputKind.IDENTITY
    p: Optional[float] = None
    delta_grid: Optional[Tuple[float, ...]] = None
    out_dir: str = "results"
    divergence: Optional[float] = None  # overrides the closed form
    h_inf_norm: Optional[float] = None
    h_p_norm: Optional[float] = None
    pilot_size: int = DEFAULT_PILOT_SIZE

    def __post_init__(self):
        if not self.n_grid:
            raise ConfigError("n_grid must not be empty")
        if any(int(n) != n or n < 1 for n in self.n_grid):
            raise ConfigError(f"n_grid entries must be positive integers: {self.n_grid}")
        if self.delta_grid is not None:
            if not self.delta_grid:
                raise ConfigError("delta_grid must not be empty")
            if any(not 0 < d < 1 for d in self.delta_grid):
                raise ConfigError("delta_grid entries must be in (0, 1)")
        if not self.estimators:
            raise ConfigError("estimators must not be empty")
        if self.reps < 1:
            raise ConfigError(f"reps must be >= 1, got {self.reps}")
        if not self.alpha > 1:
            raise ConfigError(f"alpha must be > 1, got {self.alpha}")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must be in (0, 1), got {self.delta}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    def override(self, **flags):
        """Copy with every flag that is not None applied."""
        changes = {key: value for key, value in flags.items() if value is not None}
        return config_from_dict({**self.to_dict(), **_encode(changes)})

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready form; load_config(to_dict()) gives back an equal config."""
        data = {}
        for field in dataclasses.fields(self):
            data[field.name] = getattr(self, field.name)
        return _encode(data)


def _encode(data):
    encoded = {}
    for key, value in data.items():
        if isinstance(value, (Family, OutputKind)):
            value = value.value
        elif key == "estimators":
            value = [e.code if isinstance(e, LabeledEstimator) else e for e in value]
        elif isinstance(value, tuple):
            value = list(value)
        encoded[key] = value
    return encoded


def config_from_dict(data: Dict[str, Any]) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = {field.name for field in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    missing = [key for key in REQUIRED_KEYS if key not in data]
    if missing:
        raise ConfigError(f"missing config key(s): {', '.join(missing)}")

    values = dict(data)
    try:
        values["family"] = Family(values["family"])
        values["h"] = OutputKind(values.get("h", OutputKind.IDENTITY.value))
        values["behavior_params"] = _params(values["behavior_params"])
        values["target_params"] = _params(values["target_params"])
        values["estimators"] = tuple(
            parse_estimator_code(code) for code in values["estimators"]
        )
        values["n_grid"] = tuple(int(n) for n in values["n_grid"])
        if values.get("delta_grid") is not None:
            values["delta_grid"] = tuple(float(d) for d in values["delta_grid"])
        for key in ("alpha", "delta", "p", "divergence", "h_inf_norm", "h_p_norm"):
            if values.get(key) is not None:
                values[key] = float(values[key])
        for key in ("reps", "seed", "pilot_size"):
            if key in values:
                values[key] = int(values[key])
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"invalid config value: {e}") from e
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    if isinstance(data, dict) and isinstance(data.get("config"), dict):
        # A manifest.json from an earlier run.
        data = data["config"]
    return config_from_dict(data)
