"""
GBM log-price paths as a multivariate normal input model, the discounted
Asian payoff, and its second-order Taylor surrogate.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from trulr.exceptions import InvalidParameterError
from trulr.models.distributions import MvNormal


@dataclass(frozen=True)
class MarketParams:
    r: float = 0.05
    T: float = 0.25
    M: int = 13

    def __post_init__(self):
        if not self.T > 0:
            raise InvalidParameterError(f"T must be > 0, got {self.T}")
        if self.M < 1:
            raise InvalidParameterError(f"M must be >= 1, got {self.M}")

    @property
    def dt(self):
        return self.T / self.M

    @property
    def discount(self):
        return math.exp(-self.r * self.T)


@dataclass(frozen=True)
class OptionSpec:
    """One Asian call: strike, weekly calibrations (S0, sigma), target calibration, weekly alphas."""

    K: float
    theta_weeks: Tuple[Tuple[float, float], ...]
    theta_target: Tuple[float, float]
    alphas: Tuple[float, ...]

    def __post_init__(self):
        if not self.K > 0:
            raise InvalidParameterError(f"K must be > 0, got {self.K}")
        if not self.theta_weeks or len(self.theta_weeks) != len(self.alphas):
            raise InvalidParameterError("need one alpha per week and at least one week")
        _, sigma_target = self.theta_target
        for j, ((s0, sigma), alpha) in enumerate(zip(self.theta_weeks, self.alphas)):
            if not (s0 > 0 and sigma > 0):
                raise InvalidParameterError(f"week {j}: S0 and sigma must be > 0")
            if not alpha > 1:
                raise InvalidParameterError(f"week {j}: alpha must be > 1, got {alpha}")
            if (1 - alpha) * sigma_target**2 + alpha * sigma**2 <= 0:
                raise InvalidParameterError(
                    f"week {j}: (1-alpha) sigma_target^2 + alpha sigma_week^2 must be > 0"
                )

    @property
    def weeks(self):
        return len(self.theta_weeks)


def monitoring_matrix(M) -> np.ndarray:
    """A[m, k] = min(m, k) for m, k = 1..M"""
    idx = np.arange(1, M + 1)
    return np.minimum.outer(idx, idx).astype(np.float64)


def input_model(theta, market: MarketParams) -> MvNormal:
    """Log-prices at the monitoring dates: mu = ln S0 + (r - sigma^2/2) dt (1..M), Sigma = sigma^2 dt A."""
    s0, sigma = theta
    if not (s0 > 0 and sigma > 0):
        raise InvalidParameterError(f"S0 and sigma must be > 0, got {theta}")
    steps = np.arange(1, market.M + 1, dtype=np.float64)
    mean = math.log(s0) + (market.r - 0.5 * sigma**2) * market.dt * steps
    cov = sigma**2 * market.dt * monitoring_matrix(market.M)
    return MvNormal(mean, cov)


def asian_payoff(x, K, market: MarketParams):
    """e^{-rT} max(mean_m e^{x_m} - K, 0) for one path (M,) or many (N, M)."""
    x = np.asarray(x, dtype=np.float64)
    average = np.mean(np.exp(x), axis=-1)
    return market.discount * np.maximum(average - K, 0.0)


def surrogate_payoff(x, K, market: MarketParams):
    """e^{-rT} max((K/M) sum[(x_m - ln K) + (x_m - ln K)^2 / 2], 0).

    Only used to estimate ||h||_p for boundary selection, never priced.
    """
    d = np.asarray(x, dtype=np.float64) - math.log(K)
    total = (K / market.M) * np.sum(d + 0.5 * d * d, axis=-1)
    return market.discount * np.maximum(total, 0.0)
