import json
import math

import numpy as np

from trulr.boundaries import BoundarySpec
from trulr.harness.config import config_from_dict
from trulr.harness.registry import parse_estimator_code
from trulr.json import ReportEncoder
from trulr.models.enums import BoundaryRule

from tests.utils import quick_config_dict


def test_infinities_and_nan_are_tagged():
    result = json.loads(
        json.dumps(
            {"tau": math.inf, "low": -math.inf, "missing": math.nan, "x": 1.5},
            cls=ReportEncoder,
        )
    )
    assert result == {"tau": "inf", "low": "-inf", "missing": None, "x": 1.5}


def test_boundary_spec_serialization():
    result = json.loads(json.dumps(BoundarySpec.lr(), cls=ReportEncoder))
    assert result["rule"] == "fixed"
    assert result["tau_fixed"] == "inf"
    assert result["p"] is None

    spec = BoundarySpec(BoundaryRule.PNORM_BERNSTEIN, p=40.0, b=1.7)
    result = json.loads(json.dumps(spec, cls=ReportEncoder))
    assert result["rule"] == "pnorm_bernstein"
    assert result["b"] == 1.7


def test_numpy_values():
    data = {
        "array": np.array([1.0, np.inf]),
        "count": np.int64(3),
        "value": np.float32(0.5),
        "flag": np.bool_(True),
    }
    result = json.loads(json.dumps(data, cls=ReportEncoder))
    assert result == {"array": [1.0, "inf"], "count": 3, "value": 0.5, "flag": True}


def test_config_and_estimators(tmpdir):
    config = config_from_dict(quick_config_dict(tmpdir))
    result = json.loads(json.dumps({"config": config}, cls=ReportEncoder))
    assert result["config"]["family"] == "beta"
    assert result["config"]["estimators"] == ["LR", "O", "S"]
    assert config_from_dict(result["config"]) == config

    assert json.dumps(parse_estimator_code("M:40"), cls=ReportEncoder) == '"M:40"'
