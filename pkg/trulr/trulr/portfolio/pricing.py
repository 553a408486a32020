"""
Pricing the portfolio by reusing weekly simulation data.

Week j of option i holds paths drawn under that week's calibration. Each
batch is reweighted to the target calibration, truncated at its own
boundary, and the k weekly estimators are averaged with equal weight.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from trulr.boundaries import (
    BoundarySpec,
    ProblemConstants,
    estimate_p_norm,
    truncation_boundary,
)
from trulr.divergence import alpha_divergence_closed
from trulr.estimators import EstimateReport, WeightedSample, multi_batch_estimate
from trulr.exceptions import DivergenceUndefinedError, InvalidParameterError
from trulr.harness.engine import chunk_sizes
from trulr.models.distributions import likelihood_ratio
from trulr.models.enums import BoundaryRule
from trulr.models.streams import RandomStream
from trulr.portfolio.config import PortfolioConfig
from trulr.portfolio.market import asian_payoff, input_model, surrogate_payoff

logger = logging.getLogger(__name__)

PREFERRED_P = 4.0
MIN_REFERENCE_PATHS = 1_000_000
REFERENCE_CHUNK = 1 << 18


class PricingRule(Enum):
    LR = "lr"
    TRULR_M = "trulr_m"
    TRULR_S = "trulr_s"


RULE_LABELS = {
    PricingRule.LR: "LR",
    PricingRule.TRULR_M: "TruLR-M",
    PricingRule.TRULR_S: "TruLR-S",
}


def week_p(alpha) -> float:
    """p = 4 when p/(p-1) < alpha < 2p/(p-2) allows it, else 2 alpha/(alpha - 1)."""
    p = PREFERRED_P
    if p / (p - 1) < alpha < 2 * p / (p - 2):
        return p
    return 2 * alpha / (alpha - 1)


@dataclass(frozen=True, eq=False)
class HistoryBatch:
    """paths[j][i]: (n, M) log-price paths of option i recorded in week j."""

    paths: Tuple[Tuple[np.ndarray, ...], ...]

    @property
    def weeks(self):
        return len(self.paths)

    @property
    def options(self):
        return len(self.paths[0]) if self.paths else 0

    def batch(self, week, option):
        return self.paths[week][option]


def generate_history(config: PortfolioConfig, n: int, stream: RandomStream) -> HistoryBatch:
    """Independent draws per (week, option); the (j, i) batch uses stream.spawn(j, i)."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    weeks = max(option.weeks for option in config.options)
    paths = []
    for j in range(weeks):
        week_paths = []
        for i, option in enumerate(config.options):
            if j >= option.weeks:
                raise InvalidParameterError("every option needs the same number of weeks")
            model = input_model(option.theta_weeks[j], config.market)
            week_paths.append(model.sample(stream.spawn(j, i), n))
        paths.append(tuple(week_paths))
    return HistoryBatch(tuple(paths))


@dataclass(frozen=True)
class PortfolioPrice:
    per_option: Tuple[EstimateReport, ...]
    total: float


def price_option(config, history, option_index, rule: PricingRule, delta) -> EstimateReport:
    option = config.options[option_index]
    market = config.market
    target = input_model(option.theta_target, market)
    batches, taus = [], []
    for j in range(option.weeks):
        x = history.batch(j, option_index)
        behavior = input_model(option.theta_weeks[j], market)
        batches.append(
            WeightedSample(
                asian_payoff(x, option.K, market), likelihood_ratio(target, behavior, x)
            )
        )
        taus.append(week_boundary(rule, option, j, x, market, delta))
    return multi_batch_estimate(batches, taus)


def week_boundary(rule, option, j, x, market, delta) -> float:
    """tau for week j from the exact mv-normal I_alpha and the surrogate's plug-in ||h||_p."""
    if rule == PricingRule.LR:
        return math.inf
    alpha = option.alphas[j]
    target = input_model(option.theta_target, market)
    behavior = input_model(option.theta_weeks[j], market)
    try:
        divergence = alpha_divergence_closed(target, behavior, alpha).value
    except DivergenceUndefinedError as e:
        raise DivergenceUndefinedError(f"week {j}, strike {option.K}: {e.condition}") from e
    p = week_p(alpha)
    rule_id = (
        BoundaryRule.PNORM_MGF_OPTIMAL
        if rule == PricingRule.TRULR_M
        else BoundaryRule.PNORM_SIMPLE
    )
    h_p_norm = estimate_p_norm(surrogate_payoff(x, option.K, market), p)
    constants = ProblemConstants(
        alpha=alpha,
        divergence=divergence,
        n=len(x),
        delta=delta,
        h_p_norm=h_p_norm if h_p_norm > 0 else None,
        p=p,
    )
    return truncation_boundary(BoundarySpec(rule_id, p=p), constants)


def price_portfolio(
    config: PortfolioConfig, history: HistoryBatch, rule: PricingRule, delta: float
) -> PortfolioPrice:
    per_option = tuple(
        price_option(config, history, i, rule, delta) for i in range(len(config.options))
    )
    return PortfolioPrice(per_option, float(sum(r.estimate for r in per_option)))


@dataclass(frozen=True)
class ReferencePrice:
    prices: Tuple[float, ...]
    std_errors: Tuple[float, ...]
    paths: int

    @property
    def total(self):
        return float(sum(self.prices))


def reference_price(
    config: PortfolioConfig, m: int, stream: RandomStream, min_paths=MIN_REFERENCE_PATHS
) -> ReferencePrice:
    """Plain Monte Carlo under each option's target calibration, m paths per option."""
    if m < min_paths:
        raise InvalidParameterError(f"m must be >= {min_paths}, got {m}")
    prices, errors = [], []
    for i, option in enumerate(config.options):
        model = input_model(option.theta_target, config.market)
        option_stream = stream.spawn(i)
        total = 0.0
        total_sq = 0.0
        for size in chunk_sizes(m, REFERENCE_CHUNK):
            payoff = asian_payoff(model.sample(option_stream, size), option.K, config.market)
            total += float(np.sum(payoff))
            total_sq += float(np.sum(payoff * payoff))
        mean = total / m
        var = max(total_sq / m - mean * mean, 0.0) * m / (m - 1)
        prices.append(mean)
        errors.append(math.sqrt(var / m))
        logger.info("reference price option %d: %.6g +- %.2g", i, mean, errors[-1])
    return ReferencePrice(tuple(prices), tuple(errors), m)
