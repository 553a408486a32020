import math

import numpy as np
import pytest

from trulr.exceptions import InvalidParameterError
from trulr.models.streams import RandomStream
from trulr.portfolio.market import (
    MarketParams,
    OptionSpec,
    asian_payoff,
    input_model,
    monitoring_matrix,
    surrogate_payoff,
)


def test_market_params():
    market = MarketParams()
    assert market.dt == pytest.approx(0.25 / 13)
    assert market.discount == pytest.approx(math.exp(-0.0125))
    with pytest.raises(InvalidParameterError):
        MarketParams(T=0.0)
    with pytest.raises(InvalidParameterError):
        MarketParams(M=0)


def test_monitoring_matrix():
    assert monitoring_matrix(3).tolist() == [[1, 1, 1], [1, 2, 2], [1, 2, 3]]


def test_input_model_moments():
    market = MarketParams(r=0.05, T=0.25, M=4)
    model = input_model((100.0, 0.2), market)
    dt = 0.25 / 4
    drift = (0.05 - 0.02) * dt
    assert model.mean() == pytest.approx(
        [math.log(100) + drift * m for m in range(1, 5)]
    )
    assert model.cov[2, 3] == pytest.approx(0.04 * dt * 3)
    paths = model.sample(RandomStream(1), 100_000)
    # Terminal price is lognormal with mean S0 e^{rT}.
    assert np.mean(np.exp(paths[:, -1])) == pytest.approx(
        100 * math.exp(0.05 * 0.25), rel=2e-3
    )
    with pytest.raises(InvalidParameterError):
        input_model((100.0, 0.0), market)


def test_asian_payoff():
    market = MarketParams(r=0.05, T=0.25, M=2)
    x = np.log([110.0, 90.0])
    assert asian_payoff(x, 95.0, market) == pytest.approx(5 * market.discount)
    assert asian_payoff(x, 105.0, market) == 0.0
    many = np.log([[110.0, 90.0], [120.0, 120.0]])
    assert asian_payoff(many, 95.0, market) == pytest.approx(
        [5 * market.discount, 25 * market.discount]
    )


def test_surrogate_payoff_tracks_payoff_near_the_strike():
    market = MarketParams(r=0.05, T=0.25, M=2)
    assert surrogate_payoff(np.log([95.0, 95.0]), 95.0, market) == 0.0
    x = np.log([97.0, 98.0])
    assert surrogate_payoff(x, 95.0, market) == pytest.approx(
        asian_payoff(x, 95.0, market), rel=1e-3
    )


def test_option_spec_validation():
    week = ((100.0, 0.2),)
    OptionSpec(K=100.0, theta_weeks=week, theta_target=(100.0, 0.3), alphas=(1.5,))
    with pytest.raises(InvalidParameterError, match="one alpha per week"):
        OptionSpec(K=100.0, theta_weeks=week, theta_target=(100.0, 0.3), alphas=())
    with pytest.raises(InvalidParameterError, match="alpha must be > 1"):
        OptionSpec(K=100.0, theta_weeks=week, theta_target=(100.0, 0.3), alphas=(1.0,))
    with pytest.raises(InvalidParameterError, match="must be > 0"):
        OptionSpec(K=100.0, theta_weeks=week, theta_target=(100.0, 0.6), alphas=(3.0,))
