"""
Scenarios tell the sweeps how to draw one weighted dataset, what the true
value is, and which problem constants the boundary rules see.
"""

import logging
import math
from typing import Optional

import numpy as np

from trulr.boundaries import ProblemConstants
from trulr.divergence import alpha_divergence_closed
from trulr.estimators import WeightedSample
from trulr.exceptions import UnsupportedOperationError
from trulr.models.distributions import (
    ParametricDistribution,
    build_distribution,
    likelihood_ratio,
)
from trulr.models.outputs import identity, output_function
from trulr.models.streams import RandomStream

logger = logging.getLogger(__name__)


class Scenario:
    """Interface for anything the MSE / quantile sweeps can replicate.

    Instances are shipped to worker processes, so they must pickle.
    """

    scenario_id: str
    truth: float

    def draw(self, stream: RandomStream, n: int) -> WeightedSample:
        raise NotImplementedError

    def constants(self, n: int, delta: float) -> ProblemConstants:
        raise NotImplementedError

    def pilot_values(self, stream: RandomStream, size: int) -> np.ndarray:
        """h evaluated on behavior draws, for the TruLR-E Bernstein constant."""
        raise UnsupportedOperationError(
            f"{type(self).__name__} has no pilot for Bernstein estimation"
        )


class SyntheticScenario(Scenario):
    """E_target[h(X)] estimated from draws of a parametric behavior model."""

    def __init__(
        self,
        scenario_id,
        target: ParametricDistribution,
        behavior: ParametricDistribution,
        alpha,
        h=None,
        p=None,
        truth=None,
        divergence=None,
        h_inf_norm=None,
        h_p_norm=None,
    ):
        self.scenario_id = scenario_id
        self.target = target
        self.behavior = behavior
        self.alpha = alpha
        self.p = p
        self.h = h or identity
        self.truth = target.mean() if truth is None else truth
        if divergence is None:
            divergence = alpha_divergence_closed(target, behavior, alpha).value
        self.divergence = divergence
        # Norms of h = x follow from the behavior model; anything else must be supplied.
        if self.h is identity:
            h_inf_norm = h_inf_norm if h_inf_norm is not None else _sup_hint(behavior)
            h_p_norm = h_p_norm if h_p_norm is not None else _identity_p_norm(behavior, p)
        self.h_inf_norm = h_inf_norm
        self.h_p_norm = h_p_norm
        logger.info(
            "scenario %s: I_alpha=%.6g, truth=%.6g, ||h||_inf=%s, ||h||_p=%s",
            scenario_id,
            self.divergence,
            self.truth,
            self.h_inf_norm,
            self.h_p_norm,
        )

    @classmethod
    def from_config(cls, config):
        return cls(
            config.scenario_id,
            target=build_distribution(config.family, config.target_params),
            behavior=build_distribution(config.family, config.behavior_params),
            alpha=config.alpha,
            h=output_function(config.h),
            p=config.p,
            divergence=config.divergence,
            h_inf_norm=config.h_inf_norm,
            h_p_norm=config.h_p_norm,
        )

    def draw(self, stream, n):
        x = self.behavior.sample(stream, n)
        return WeightedSample(self.h(x), likelihood_ratio(self.target, self.behavior, x))

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
        return self.h(self.behavior.sample(stream, size))


def _sup_hint(behavior) -> Optional[float]:
    sup = behavior.sup_abs
    return float(sup) if math.isfinite(sup) else None


def _identity_p_norm(behavior, p) -> Optional[float]:
    if p is None:
        return None
    try:
        return behavior.absolute_moment(p) ** (1.0 / p)
    except UnsupportedOperationError:
        return None
