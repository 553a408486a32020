"""
Named synthetic scenarios. Each preset is a plain config dict, so it can be
dumped to JSON, edited and loaded back with load_config.
"""

import copy

from trulr.exceptions import ConfigError
from trulr.harness.config import ExperimentConfig, config_from_dict

N_GRID = [1000, 5000, 10000, 50000]
DELTA_GRID = [1e-1, 1e-2, 1e-3, 1e-4]

PRESETS = {
    "beta_i": {
        "scenario_id": "beta_i",
        "family": "beta",
        "behavior_params": {"a": 90, "b": 120},
        "target_params": {"a": 16, "b": 21},
        "estimators": ["LR", "O", "S"],
        "alpha": 1.2,
    },
    "beta_ii": {
        "scenario_id": "beta_ii",
        "family": "beta",
        "behavior_params": {"a": 44, "b": 22},
        "target_params": {"a": 20, "b": 10},
        "estimators": ["LR", "O", "S"],
        "alpha": 1.8,
    },
    "normal_i": {
        "scenario_id": "normal_i",
        "family": "normal",
        "behavior_params": {"mu": 0, "sigma": 1.7},
        "target_params": {"mu": 0.2, "sigma": 4},
        "estimators": ["LR", "B:1.7", "M", "SP", "E"],
        "alpha": 1.2,
        "p": 40,
    },
    "normal_ii": {
        "scenario_id": "normal_ii",
        "family": "normal",
        "behavior_params": {"mu": 1, "sigma": 1.5},
        "target_params": {"mu": 0.6, "sigma": 2},
        "estimators": ["LR", "B:1.5", "M", "SP", "E"],
        "alpha": 2.1,
        "p": 4,
    },
    "chi_squared_i": {
        "scenario_id": "chi_squared_i",
        "family": "chi_squared",
        "behavior_params": {"k": 12},
        "target_params": {"k": 3},
        "estimators": ["LR", "M", "SP", "E"],
        "alpha": 1.3,
        "p": 40,
    },
    "chi_squared_ii": {
        "scenario_id": "chi_squared_ii",
        "family": "chi_squared",
        "behavior_params": {"k": 18},
        "target_params": {"k": 10},
        "estimators": ["LR", "M", "SP", "E"],
        "alpha": 2.2,
        "p": 4,
    },
}

DEFAULTS = {
    "n_grid": N_GRID,
    "delta": 0.01,
    "delta_grid": DELTA_GRID,
    "reps": 1000,
    "seed": 1,
}


def preset_dict(name):
    try:
        preset = PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset '{name}', choose from: {', '.join(sorted(PRESETS))}"
        )
    return {**copy.deepcopy(DEFAULTS), **copy.deepcopy(preset), "out_dir": f"results/{name}"}


def preset_config(name, **overrides) -> ExperimentConfig:
    return config_from_dict({**preset_dict(name), **overrides})
