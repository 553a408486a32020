"""
Portfolio configuration. Defaults reproduce the three-option, four-week
table (r = 5%, T = 0.25, 13 monitoring dates).
"""

import dataclasses
import json
from dataclasses import dataclass
from typing import Optional, Tuple

from trulr.exceptions import ConfigError, InvalidParameterError
from trulr.portfolio.market import MarketParams, OptionSpec

DEFAULT_OPTIONS = (
    OptionSpec(
        K=100.0,
        theta_weeks=((100.0, 0.18), (102.5, 0.18), (105.0, 0.24), (107.5, 0.24)),
        theta_target=(110.0, 0.36),
        alphas=(1.2, 1.2, 1.6, 1.6),
    ),
    OptionSpec(
        K=45.0,
        theta_weeks=((55.0, 0.70), (65.0, 0.70), (65.0, 0.70), (60.0, 0.70)),
        theta_target=(55.0, 0.25),
        alphas=(1.7, 1.7, 1.7, 1.7),
    ),
    OptionSpec(
        K=80.0,
        theta_weeks=((80.0, 0.10), (85.0, 0.15), (75.0, 0.20), (85.0, 0.25)),
        theta_target=(80.0, 0.30),
        alphas=(1.1, 1.2, 1.2, 1.6),
    ),
)


@dataclass(frozen=True)
class PortfolioConfig:
    seed: int = 1
    market: MarketParams = MarketParams()
    options: Tuple[OptionSpec, ...] = DEFAULT_OPTIONS
    n_grid: Tuple[int, ...] = (1000, 5000)
    reps: int = 1000
    delta: float = 0.01
    reference_paths: int = 10_000_000
    reference_prices: Optional[Tuple[float, ...]] = None
    out_dir: str = "results/portfolio"

    def __post_init__(self):
        if not self.options:
            raise ConfigError("portfolio needs at least one option")
        if not self.n_grid or any(n < 1 for n in self.n_grid):
            raise ConfigError("n_grid must hold positive counts")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must be in (0, 1), got {self.delta}")
        if self.reference_prices is not None and len(self.reference_prices) != len(
            self.options
        ):
            raise ConfigError("need one reference price per option")


def _reject_unknown(data, cls, where):
    known = {field.name for field in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _option_from_dict(data, index):
    _reject_unknown(data, OptionSpec, f"options[{index}]")
    try:
        return OptionSpec(
            K=float(data["K"]),
            theta_weeks=tuple((float(s), float(v)) for s, v in data["theta_weeks"]),
            theta_target=tuple(float(v) for v in data["theta_target"]),
            alphas=tuple(float(a) for a in data["alphas"]),
        )
    except KeyError as e:
        raise ConfigError(f"options[{index}] is missing {e}") from e
    except InvalidParameterError as e:
        raise ConfigError(f"options[{index}]: {e}") from e


def portfolio_config_from_dict(data) -> PortfolioConfig:
    if not isinstance(data, dict):
        raise ConfigError("portfolio config must be a JSON object")
    _reject_unknown(data, PortfolioConfig, "portfolio config")
    values = dict(data)
    try:
        if "market" in values:
            _reject_unknown(values["market"], MarketParams, "market")
            values["market"] = MarketParams(**values["market"])
        if "options" in values:
            values["options"] = tuple(
                _option_from_dict(option, i) for i, option in enumerate(values["options"])
            )
        for key in ("n_grid", "reference_prices"):
            if values.get(key) is not None:
                values[key] = tuple(values[key])
    except (TypeError, InvalidParameterError) as e:
        raise ConfigError(f"invalid portfolio config: {e}") from e
    return PortfolioConfig(**values)


def load_portfolio_config(path) -> PortfolioConfig:
    try:
        with open(path) as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    if isinstance(data, dict) and isinstance(data.get("config"), dict):
        data = data["config"]
    return portfolio_config_from_dict(data)
