import json

import pytest

from trulr.exceptions import ConfigError
from trulr.harness.config import config_from_dict, load_config
from trulr.harness.presets import PRESETS, preset_config, preset_dict
from trulr.models.enums import Family, OutputKind

from tests.utils import quick_config_dict, write_json


def test_load_config(tmpdir):
    path = write_json(tmpdir.join("beta.json"), quick_config_dict(tmpdir))
    config = load_config(path)
    assert config.family == Family.BETA
    assert config.h == OutputKind.IDENTITY
    assert config.n_grid == (200, 400)
    assert config.delta_grid == (0.1, 0.5)
    assert [e.code for e in config.estimators] == ["LR", "O", "S"]
    assert config.behavior_params == {"a": 90, "b": 120}


def test_to_dict_round_trip(tmpdir):
    config = config_from_dict(quick_config_dict(tmpdir))
    assert config_from_dict(json.loads(json.dumps(config.to_dict()))) == config


def test_manifest_is_accepted_as_config(tmpdir):
    config = config_from_dict(quick_config_dict(tmpdir))
    path = write_json(tmpdir.join("manifest.json"), {"config": config.to_dict(), "truth": 0.4})
    assert load_config(path) == config


def test_override_takes_precedence(tmpdir):
    config = config_from_dict(quick_config_dict(tmpdir))
    changed = config.override(seed=99, reps=None, n_grid=[1000], estimators=["M:40"])
    assert changed.seed == 99
    assert changed.reps == config.reps
    assert changed.n_grid == (1000,)
    assert changed.estimators[0].spec.p == 40.0


def test_rejects_bad_documents(tmpdir):
    with pytest.raises(ConfigError, match="unknown config key"):
        config_from_dict(quick_config_dict(tmpdir, colour="red"))
    data = quick_config_dict(tmpdir)
    del data["seed"]
    with pytest.raises(ConfigError, match="missing config key"):
        config_from_dict(data)
    with pytest.raises(ConfigError):
        config_from_dict(quick_config_dict(tmpdir, family="gamma"))
    with pytest.raises(ConfigError):
        config_from_dict(quick_config_dict(tmpdir, n_grid=[]))
    with pytest.raises(ConfigError):
        config_from_dict(quick_config_dict(tmpdir, delta=1.5))
    with pytest.raises(ConfigError):
        config_from_dict(quick_config_dict(tmpdir, alpha=1.0))
    with pytest.raises(ConfigError):
        config_from_dict(quick_config_dict(tmpdir, seed=-1))
    with pytest.raises(ConfigError):
        config_from_dict([1, 2, 3])


def test_load_config_errors(tmpdir):
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmpdir.join("missing.json")))
    path = tmpdir.join("broken.json")
    path.write("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(str(path))


def test_presets():
    for name in PRESETS:
        config = preset_config(name)
        assert config.scenario_id == name
        assert config.out_dir == f"results/{name}"
    assert preset_config("normal_i").p == 40.0
    assert preset_config("beta_i", reps=5).reps == 5
    preset_dict("beta_i")["n_grid"].append(7)
    assert 7 not in preset_dict("beta_i")["n_grid"]
    with pytest.raises(ConfigError, match="unknown preset"):
        preset_dict("gamma_i")
