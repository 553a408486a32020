"""
End-to-end letter-recognition bandit experiment: split, train, replicate
offline evaluation over n, write mse_sweep.csv.
"""

import dataclasses
import json
import logging
import os
from dataclasses import dataclass
from typing import Optional, Tuple

from trulr.bandit.classifier import train_nearest_centroid
from trulr.bandit.dataset import DEFAULT_TRAIN_FRAC, load_letter_dataset, split
from trulr.bandit.evaluation import BanditScenario
from trulr.boundaries import DEFAULT_PILOT_SIZE
from trulr.exceptions import ConfigError
from trulr.harness.persistence import MSE_COLUMNS, write_csv, write_manifest
from trulr.harness.registry import (
    LabeledEstimator,
    parse_estimator_code,
    parse_estimator_string,
)
from trulr.harness.sweeps import mse_sweep_core, resolve_estimators
from trulr.models.enums import RewardKind
from trulr.models.streams import RandomStream

logger = logging.getLogger(__name__)

SPLIT_STREAM_ID = 2**63 + 1


@dataclass(frozen=True)
class BanditConfig:
    dataset: str
    seed: int
    theta: float = 0.99
    theta0: float = 0.5
    alpha: float = 1.3
    reward_kind: RewardKind = RewardKind.BINARY
    p: Optional[float] = None
    estimators: Tuple[LabeledEstimator, ...] = tuple(parse_estimator_string("LR,O,S"))
    n_grid: Tuple[int, ...] = (100, 300, 500, 700, 1000)
    delta: float = 0.01
    reps: int = 1000
    train_frac: float = DEFAULT_TRAIN_FRAC
    out_dir: str = "results/bandit"

    def __post_init__(self):
        if not self.n_grid or self.reps < 1:
            raise ConfigError("bandit run needs a non-empty n_grid and reps >= 1")

    @property
    def scenario_id(self):
        return f"bandit_{self.reward_kind.value}"

    def override(self, **flags):
        """Copy with every flag that is not None applied."""
        changes = {key: value for key, value in flags.items() if value is not None}
        return bandit_config_from_dict({**self.to_dict(), **changes})

    def to_dict(self):
        data = {field.name: getattr(self, field.name) for field in dataclasses.fields(self)}
        data["reward_kind"] = self.reward_kind.value
        data["estimators"] = [e.code for e in self.estimators]
        data["n_grid"] = list(self.n_grid)
        return data


def bandit_config_from_dict(data) -> BanditConfig:
    if not isinstance(data, dict):
        raise ConfigError("bandit config must be a JSON object")
    known = {field.name for field in dataclasses.fields(BanditConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown bandit config key(s): {', '.join(unknown)}")
    for key in ("dataset", "seed"):
        if data.get(key) is None:
            raise ConfigError(f"bandit config needs {key}")
    values = dict(data)
    try:
        if "reward_kind" in values:
            values["reward_kind"] = RewardKind(values["reward_kind"])
        if "estimators" in values:
            estimators = values["estimators"]
            if isinstance(estimators, str):
                estimators = estimators.split(",")
            values["estimators"] = tuple(parse_estimator_code(code) for code in estimators)
        if "n_grid" in values:
            values["n_grid"] = tuple(int(n) for n in values["n_grid"])
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"invalid bandit config value: {e}") from e
    return BanditConfig(**values)


def load_bandit_config(path) -> BanditConfig:
    try:
        with open(path) as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    if isinstance(data, dict) and isinstance(data.get("config"), dict):
        data = data["config"]
    return bandit_config_from_dict(data)


def build_scenario(config: BanditConfig) -> BanditScenario:
    dataset = load_letter_dataset(config.dataset)
    train, eval_set = split(dataset, config.train_frac, RandomStream(config.seed, SPLIT_STREAM_ID))
    classifier = train_nearest_centroid(train)
    logger.info(
        "split %d/%d, training accuracy %.4f",
        len(train),
        len(eval_set),
        classifier.accuracy(train),
    )
    return BanditScenario(
        config.scenario_id,
        classifier,
        eval_set,
        theta=config.theta,
        theta0=config.theta0,
        alpha=config.alpha,
        reward_kind=config.reward_kind,
        p=config.p,
    )


def run_bandit(config: BanditConfig, threads=1, scenario=None, on_grid_point=None):
    scenario = scenario or build_scenario(config)
    estimators = resolve_estimators(
        scenario, config.estimators, config.seed, DEFAULT_PILOT_SIZE
    )
    rows = []
    for grid_rows in mse_sweep_core(
        scenario,
        estimators,
        config.n_grid,
        config.delta,
        config.reps,
        config.seed,
        threads,
    ):
        rows.extend(grid_rows)
        if on_grid_point is not None:
            on_grid_point(grid_rows)
    write_csv(rows, os.path.join(config.out_dir, "mse_sweep.csv"), MSE_COLUMNS)
    write_manifest(
        config.out_dir,
        config,
        {
            "truth": scenario.truth,
            "divergence": scenario.divergence,
            "max_weight": scenario.max_weight,
            "estimators": {e.label: e.spec for e in estimators},
        },
    )
    return rows
