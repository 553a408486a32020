"""
Logged-data collection, the exact value oracle and offline LR/TruLR
evaluation for epsilon-boost policies.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from trulr.bandit.dataset import NUM_ACTIONS, LetterDataset
from trulr.bandit.policies import EpsilonBoostPolicy
from trulr.boundaries import BoundarySpec, ProblemConstants, truncation_boundary
from trulr.divergence import alpha_divergence_closed
from trulr.estimators import EstimateReport, WeightedSample, estimate
from trulr.exceptions import AbsoluteContinuityError, InvalidParameterError
from trulr.harness.scenarios import Scenario
from trulr.models.distributions import normal_absolute_moment
from trulr.models.enums import RewardKind
from trulr.models.streams import RandomStream

logger = logging.getLogger(__name__)

REWARD_NOISE_SD = 0.5
DEFAULT_NORMAL_REWARD_P = 40.0


@dataclass(frozen=True)
class LoggedRecord:
    context_index: int
    action: int
    reward: float
    behavior_prob: float


@dataclass(frozen=True, eq=False)
class LoggedData:
    """Columnar logged records; predicted holds the classifier pick per context."""

    context_index: np.ndarray
    action: np.ndarray
    reward: np.ndarray
    behavior_prob: np.ndarray
    predicted: np.ndarray

    def __len__(self):
        return self.action.size

    def __getitem__(self, i):
        return LoggedRecord(
            int(self.context_index[i]),
            int(self.action[i]),
            float(self.reward[i]),
            float(self.behavior_prob[i]),
        )


def true_policy_value(policy: EpsilonBoostPolicy, eval_set: LetterDataset, reward_kind=None):
    """Mean over contexts of pi(label | x); reward noise is zero-mean so kind is irrelevant."""
    predicted = policy.classifier.predict(eval_set.features)
    return float(np.mean(policy.prob(eval_set.labels, predicted)))


def simulate_logs(
    labels, predicted, behavior_policy, n, reward_kind, stream: RandomStream
) -> LoggedData:
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    gen = stream.generator
    contexts = gen.integers(0, labels.size, n)
    picks = predicted[contexts]
    actions = behavior_policy.sample_actions(picks, stream)
    reward = (actions == labels[contexts]).astype(np.float64)
    if reward_kind == RewardKind.NORMAL:
        reward = reward + gen.normal(0.0, REWARD_NOISE_SD, n)
    return LoggedData(
        context_index=contexts,
        action=actions,
        reward=reward,
        behavior_prob=behavior_policy.prob(actions, picks),
        predicted=picks,
    )


def collect_logged_data(
    behavior_policy: EpsilonBoostPolicy,
    eval_set: LetterDataset,
    n: int,
    reward_kind: RewardKind,
    stream: RandomStream,
) -> LoggedData:
    """n records: uniform context (with replacement), behavior action, reward."""
    predicted = behavior_policy.classifier.predict(eval_set.features)
    return simulate_logs(
        eval_set.labels, predicted, behavior_policy, n, reward_kind, stream
    )


def policy_alpha_divergence(theta, theta0, alpha) -> float:
    """I_alpha between the action distributions of two epsilon-boost policies."""
    target = EpsilonBoostPolicy(theta).action_distribution()
    behavior = EpsilonBoostPolicy(theta0).action_distribution()
    return alpha_divergence_closed(target, behavior, alpha).value


def max_policy_weight(theta, theta0) -> float:
    target, behavior = EpsilonBoostPolicy(theta), EpsilonBoostPolicy(theta0)
    ratios = []
    if behavior.top_prob > 0:
        ratios.append(target.top_prob / behavior.top_prob)
    if behavior.other_prob > 0:
        ratios.append(target.other_prob / behavior.other_prob)
    return max(ratios)


def offline_weights(logged: LoggedData, target_policy: EpsilonBoostPolicy):
    if np.any(logged.behavior_prob <= 0):
        raise AbsoluteContinuityError("logged record with zero behavior probability")
    return target_policy.prob(logged.action, logged.predicted) / logged.behavior_prob


def evaluate_offline(
    logged: LoggedData,
    target_policy: EpsilonBoostPolicy,
    boundary_spec: BoundarySpec,
    constants: ProblemConstants,
    behavior_theta: Optional[float] = None,
) -> EstimateReport:
    """LR/TruLR value estimate with h = reward and l = pi_target / pi_behavior.

    The boundary uses the exact I_alpha of the two action distributions; it is
    context-free, so one value serves every record. behavior_theta defaults
    to the one implied by the logged probabilities.
    """
    ws = WeightedSample(logged.reward, offline_weights(logged, target_policy))
    if boundary_spec.is_lr:
        return estimate(ws)
    if behavior_theta is None:
        behavior_theta = _implied_theta(logged)
    divergence = policy_alpha_divergence(
        target_policy.theta, behavior_theta, constants.alpha
    )
    constants = dataclasses.replace(constants, divergence=divergence, n=len(ws))
    return estimate(ws, truncation_boundary(boundary_spec, constants))


def _implied_theta(logged: LoggedData) -> float:
    # Records whose action is the pick carry theta + (1 - theta)/26.
    on_pick = logged.action == logged.predicted
    if np.any(on_pick):
        top = float(logged.behavior_prob[on_pick][0])
        return (NUM_ACTIONS * top - 1) / (NUM_ACTIONS - 1)
    other = float(logged.behavior_prob[0])
    return 1 - NUM_ACTIONS * other


def reward_p_norm(behavior_value, p, reward_kind) -> float:
    """||reward||_p under the behavior policy.

    Binary rewards: behavior_value^(1/p). Normal rewards mix N(1, 0.25) with
    weight behavior_value and N(0, 0.25) otherwise.
    """
    if reward_kind == RewardKind.BINARY:
        return behavior_value ** (1.0 / p)
    moment = behavior_value * normal_absolute_moment(
        1.0, REWARD_NOISE_SD, p
    ) + (1 - behavior_value) * normal_absolute_moment(0.0, REWARD_NOISE_SD, p)
    return moment ** (1.0 / p)


class BanditScenario(Scenario):
    """Off-policy evaluation of the target policy from behavior logs.

    Only labels and classifier picks of the evaluation contexts are kept, so
    the scenario pickles cheaply.
    """

    def __init__(
        self,
        scenario_id,
        classifier,
        eval_set: LetterDataset,
        theta,
        theta0,
        alpha,
        reward_kind: RewardKind,
        p=None,
    ):
        self.scenario_id = scenario_id
        self.labels = eval_set.labels
        self.predicted = classifier.predict(eval_set.features)
        self.target_policy = EpsilonBoostPolicy(theta)
        self.behavior_policy = EpsilonBoostPolicy(theta0)
        self.alpha = alpha
        self.reward_kind = reward_kind
        if reward_kind == RewardKind.NORMAL and p is None:
            p = DEFAULT_NORMAL_REWARD_P
        self.p = p
        self.truth = self._value(self.target_policy)
        self.behavior_value = self._value(self.behavior_policy)
        self.divergence = policy_alpha_divergence(theta, theta0, alpha)
        self.max_weight = max_policy_weight(theta, theta0)
        self.h_inf_norm = 1.0 if reward_kind == RewardKind.BINARY else None
        self.h_p_norm = (
            reward_p_norm(self.behavior_value, p, reward_kind) if p is not None else None
        )
        logger.info(
            "bandit %s: v(target)=%.6g, I_alpha=%.6g, max weight=%.6g",
            scenario_id,
            self.truth,
            self.divergence,
            self.max_weight,
        )

    def _value(self, policy):
        return float(np.mean(policy.prob(self.labels, self.predicted)))

    def logs(self, stream, n):
        return simulate_logs(
            self.labels, self.predicted, self.behavior_policy, n, self.reward_kind, stream
        )

    def draw(self, stream, n):
        logged = self.logs(stream, n)
        return WeightedSample(logged.reward, offline_weights(logged, self.target_policy))

    def constants(self, n, delta):
        return ProblemConstants(
            alpha=self.alpha,
            divergence=self.divergence,
            n=n,
            delta=delta,
            h_inf_norm=self.h_inf_norm,
            h_p_norm=self.h_p_norm,
            p=self.p,
        )

    def pilot_values(self, stream, size):
        return self.logs(stream, size).reward


def simulated_policy_value(policy, eval_set, m, stream):
    """(mean, standard error) of m simulated binary rewards; cross-checks true_policy_value."""
    logged = collect_logged_data(policy, eval_set, m, RewardKind.BINARY, stream)
    return float(np.mean(logged.reward)), float(np.std(logged.reward, ddof=1) / math.sqrt(m))
