"""
Letter-recognition dataset: one instance per line, a capital letter followed
by 16 integer features in [0, 15], e.g. "T,2,8,3,5,1,8,13,0,6,6,10,8,0,8,0,8".
"""

import logging
import math
import string
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from trulr.exceptions import DatasetFormatError, InvalidParameterError
from trulr.models.streams import RandomStream

logger = logging.getLogger(__name__)

NUM_FEATURES = 16
NUM_ACTIONS = 26
FEATURE_MAX = 15
DEFAULT_TRAIN_FRAC = 0.3
LETTER_TO_LABEL = {letter: i + 1 for i, letter in enumerate(string.ascii_uppercase)}


@dataclass(frozen=True)
class LabeledInstance:
    features: Tuple[int, ...]
    label: int

    def __post_init__(self):
        if len(self.features) != NUM_FEATURES:
            raise InvalidParameterError(
                f"expected {NUM_FEATURES} features, got {len(self.features)}"
            )
        if not 1 <= self.label <= NUM_ACTIONS:
            raise InvalidParameterError(f"label {self.label} outside 1..{NUM_ACTIONS}")


class LetterDataset:
    """Columnar store of LabeledInstances (features as an (N, 16) int array)."""

    def __init__(self, features, labels):
        self.features = np.asarray(features, dtype=np.int64).reshape(-1, NUM_FEATURES)
        self.labels = np.asarray(labels, dtype=np.int64).reshape(-1)
        if self.features.shape[0] != self.labels.size:
            raise InvalidParameterError("features and labels differ in length")

    def __len__(self):
        return self.labels.size

    def __getitem__(self, index):
        return LabeledInstance(tuple(int(v) for v in self.features[index]), int(self.labels[index]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def subset(self, indices):
        return LetterDataset(self.features[indices], self.labels[indices])


def parse_line(line, line_number) -> LabeledInstance:
    fields = [field.strip() for field in line.strip().split(",")]
    if len(fields) != NUM_FEATURES + 1:
        raise DatasetFormatError(
            line_number, f"expected {NUM_FEATURES + 1} fields, got {len(fields)}"
        )
    letter = fields[0]
    if letter not in LETTER_TO_LABEL:
        raise DatasetFormatError(line_number, f"'{letter}' is not a capital letter")
    try:
        features = tuple(int(v) for v in fields[1:])
    except ValueError as e:
        raise DatasetFormatError(line_number, f"non-integer feature: {e}") from e
    if any(not 0 <= v <= FEATURE_MAX for v in features):
        raise DatasetFormatError(line_number, f"features must lie in [0, {FEATURE_MAX}]")
    return LabeledInstance(features, LETTER_TO_LABEL[letter])


def load_letter_dataset(path) -> LetterDataset:
    features, labels = [], []
    with open(path) as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            instance = parse_line(line, line_number)
            features.append(instance.features)
            labels.append(instance.label)
    logger.info("loaded %d letter instances from %s", len(labels), path)
    return LetterDataset(np.array(features, dtype=np.int64).reshape(-1, NUM_FEATURES), labels)


def split(dataset: LetterDataset, train_frac, stream: RandomStream):
    """Seeded shuffle then prefix split; train gets floor(train_frac * N) records."""
    if not 0 < train_frac < 1:
        raise InvalidParameterError(f"train_frac must be in (0, 1), got {train_frac}")
    order = stream.generator.permutation(len(dataset))
    n_train = math.floor(train_frac * len(dataset) + 1e-9)
    return dataset.subset(order[:n_train]), dataset.subset(order[n_train:])
