"""
Encode trulr result objects (enums, dataclasses, numpy values) to JSON.
"""

import dataclasses
import json
import math
from enum import Enum

import numpy as np

from trulr.harness.config import ExperimentConfig
from trulr.harness.registry import LabeledEstimator


def _finite_or_tag(value):
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return None
    return value


class ReportEncoder(json.JSONEncoder):
    def encode(self, obj):
        return super().encode(self._sanitize(obj))

    def iterencode(self, obj, _one_shot=False):
        return super().iterencode(self._sanitize(obj), _one_shot)

    def _sanitize(self, obj):
        # Floats never reach default(), so infinities are rewritten up front.
        if isinstance(obj, float):
            return _finite_or_tag(obj)
        if isinstance(obj, dict):
            return {key: self._sanitize(value) for key, value in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [self._sanitize(value) for value in obj]
        return obj

    def default(self, obj):
        if obj is None:
            return None
        if isinstance(obj, Enum):
            return obj.value
        if isinstance(obj, ExperimentConfig):
            return self._sanitize(obj.to_dict())
        if isinstance(obj, LabeledEstimator):
            return obj.code
        if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            return self._sanitize(
                {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}
            )
        if isinstance(obj, np.ndarray):
            return self._sanitize(obj.tolist())
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return _finite_or_tag(float(obj))
        if isinstance(obj, np.bool_):
            return bool(obj)
        return json.JSONEncoder.default(self, obj)
