from dataclasses import dataclass

import numpy as np

from trulr.bandit.dataset import NUM_ACTIONS, LetterDataset
from trulr.exceptions import InvalidParameterError


@dataclass(frozen=True, eq=False)
class NearestCentroidClassifier:
    """Predicts the class whose feature centroid is closest (Euclidean).

    Ties go to the smallest class index.
    """

    centroids: np.ndarray  # (NUM_ACTIONS, NUM_FEATURES); row k is class k + 1

    def predict(self, features) -> np.ndarray:
        x = np.atleast_2d(np.asarray(features, dtype=np.float64))
        distances = (
            np.sum(x * x, axis=1)[:, None]
            - 2 * x @ self.centroids.T
            + np.sum(self.centroids * self.centroids, axis=1)[None, :]
        )
        # argmin keeps the first (smallest) index among equal distances
        return np.argmin(distances, axis=1) + 1

    def accuracy(self, dataset: LetterDataset) -> float:
        return float(np.mean(self.predict(dataset.features) == dataset.labels))


def train_nearest_centroid(train: LetterDataset) -> NearestCentroidClassifier:
    centroids = np.empty((NUM_ACTIONS, train.features.shape[1]))
    for k in range(1, NUM_ACTIONS + 1):
        members = train.features[train.labels == k]
        if members.shape[0] == 0:
            raise InvalidParameterError(f"class {k} has no training instances")
        centroids[k - 1] = members.mean(axis=0)
    return NearestCentroidClassifier(centroids)
