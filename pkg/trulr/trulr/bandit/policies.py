from dataclasses import dataclass

import numpy as np

from trulr.bandit.classifier import NearestCentroidClassifier
from trulr.bandit.dataset import NUM_ACTIONS
from trulr.exceptions import InvalidParameterError
from trulr.models.distributions import FiniteDiscrete


@dataclass(frozen=True)
class EpsilonBoostPolicy:
    """With probability theta play the classifier's pick, else a uniform action.

    The pick therefore has probability theta + (1 - theta)/26 and every other
    action (1 - theta)/26.
    """

    theta: float
    classifier: NearestCentroidClassifier = None

    def __post_init__(self):
        if not 0 <= self.theta <= 1:
            raise InvalidParameterError(f"theta must be in [0, 1], got {self.theta}")

    @property
    def top_prob(self):
        return self.theta + (1 - self.theta) / NUM_ACTIONS

    @property
    def other_prob(self):
        return (1 - self.theta) / NUM_ACTIONS

    def prob(self, action, predicted):
        """pi(action | x) given the classifier's pick for x."""
        return np.where(
            np.asarray(action) == np.asarray(predicted), self.top_prob, self.other_prob
        )

    def action_probs(self, predicted: int) -> np.ndarray:
        probs = np.full(NUM_ACTIONS, self.other_prob)
        probs[predicted - 1] = self.top_prob
        return probs

    def sample_actions(self, predicted, stream) -> np.ndarray:
        predicted = np.asarray(predicted)
        gen = stream.generator
        exploit = gen.random(predicted.size) < self.theta
        uniform = gen.integers(1, NUM_ACTIONS + 1, predicted.size)
        return np.where(exploit, predicted, uniform)

    def action_distribution(self) -> FiniteDiscrete:
        """Distribution over (pick, other_1, ..., other_25); the same for every context."""
        return FiniteDiscrete(
            np.arange(NUM_ACTIONS),
            [self.top_prob] + [self.other_prob] * (NUM_ACTIONS - 1),
        )
