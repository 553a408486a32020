import json
import math

import numpy as np
import pandas as pd
import pytest

from trulr.estimators import WeightedSample, lr_estimate
from trulr.exceptions import InvalidParameterError
from trulr.harness.persistence import MSE_COLUMNS
from trulr.models.distributions import likelihood_ratio
from trulr.models.streams import RandomStream
from trulr.portfolio.config import portfolio_config_from_dict
from trulr.portfolio.experiment import (
    TOTAL_ID,
    option_id,
    resolve_reference,
    run_portfolio,
)
from trulr.portfolio.market import asian_payoff, input_model
from trulr.portfolio.pricing import (
    PricingRule,
    generate_history,
    price_option,
    price_portfolio,
    reference_price,
    week_boundary,
    week_p,
)

from tests.utils import listdir

OPTIONS = [
    {
        "K": 100,
        "theta_weeks": [[100, 0.2], [101, 0.2]],
        "theta_target": [100, 0.22],
        "alphas": [1.5, 1.5],
    },
    {
        "K": 50,
        "theta_weeks": [[52, 0.3], [50, 0.25]],
        "theta_target": [51, 0.3],
        "alphas": [1.2, 1.8],
    },
]


def small_config(tmpdir=None, **overrides):
    data = {"seed": 2, "market": {"M": 2}, "options": OPTIONS, "reps": 4}
    if tmpdir is not None:
        data["out_dir"] = str(tmpdir)
    data.update(overrides)
    return portfolio_config_from_dict(data)


def test_week_p():
    assert week_p(1.6) == 4.0
    assert week_p(1.5) == 4.0
    assert week_p(1.2) == pytest.approx(12.0)
    assert week_p(1.1) == pytest.approx(22.0)
    assert week_p(5.0) == pytest.approx(2.5)


def test_generate_history():
    config = small_config()
    history = generate_history(config, 50, RandomStream(1))
    assert history.weeks == 2 and history.options == 2
    assert history.batch(1, 0).shape == (50, 2)
    again = generate_history(config, 50, RandomStream(1))
    assert np.array_equal(history.batch(1, 1), again.batch(1, 1))
    assert not np.array_equal(history.batch(0, 1), history.batch(1, 1))
    assert np.array_equal(
        history.batch(1, 0),
        input_model((101.0, 0.2), config.market).sample(RandomStream(1).spawn(1, 0), 50),
    )
    with pytest.raises(InvalidParameterError):
        generate_history(config, 0, RandomStream(1))


def test_lr_price_averages_weekly_estimators():
    config = small_config()
    history = generate_history(config, 200, RandomStream(3))
    option = config.options[0]
    target = input_model(option.theta_target, config.market)
    weekly = []
    for j in range(2):
        x = history.batch(j, 0)
        behavior = input_model(option.theta_weeks[j], config.market)
        weekly.append(
            lr_estimate(
                WeightedSample(
                    asian_payoff(x, option.K, config.market),
                    likelihood_ratio(target, behavior, x),
                )
            ).estimate
        )
    report = price_option(config, history, 0, PricingRule.LR, 0.01)
    assert report.estimate == pytest.approx(np.mean(weekly))
    assert report.n == 400
    assert report.batch_taus == (math.inf, math.inf)


def test_truncated_prices_use_one_boundary_per_week():
    config = small_config()
    history = generate_history(config, 500, RandomStream(3))
    report = price_option(config, history, 1, PricingRule.TRULR_M, 0.01)
    assert len(report.batch_taus) == 2
    assert all(math.isfinite(t) and t > 0 for t in report.batch_taus)
    assert report.tau == max(report.batch_taus)
    option = config.options[1]
    assert report.batch_taus[0] == week_boundary(
        PricingRule.TRULR_M, option, 0, history.batch(0, 1), config.market, 0.01
    )
    assert week_boundary(
        PricingRule.LR, option, 0, history.batch(0, 1), config.market, 0.01
    ) == math.inf
    # The simple rule takes x* = 1, which sits above the MGF-optimal x*.
    simple = week_boundary(
        PricingRule.TRULR_S, option, 1, history.batch(1, 1), config.market, 0.01
    )
    assert simple > report.batch_taus[1]


def test_portfolio_total_is_sum_of_options():
    config = small_config()
    history = generate_history(config, 100, RandomStream(4))
    price = price_portfolio(config, history, PricingRule.TRULR_S, 0.05)
    assert len(price.per_option) == 2
    assert price.total == pytest.approx(sum(r.estimate for r in price.per_option))


def test_prices_agree_with_reference():
    config = small_config()
    reference = reference_price(config, 200_000, RandomStream(9), min_paths=1000)
    assert reference.paths == 200_000
    assert all(se > 0 for se in reference.std_errors)
    history = generate_history(config, 20_000, RandomStream(10))
    for rule in PricingRule:
        price = price_portfolio(config, history, rule, 0.01)
        for report, truth in zip(price.per_option, reference.prices):
            assert report.estimate == pytest.approx(truth, rel=0.06)


def test_reference_price_validation():
    with pytest.raises(InvalidParameterError):
        reference_price(small_config(), 10, RandomStream(1))


def test_resolve_reference_prefers_configured_prices():
    reference = resolve_reference(small_config(reference_prices=[3.0, 2.0]))
    assert reference.prices == (3.0, 2.0)
    assert reference.total == 5.0
    assert reference.paths == 0
    assert all(math.isnan(se) for se in reference.std_errors)


def test_run_portfolio(tmpdir):
    config = small_config(tmpdir, n_grid=[100, 200], reference_prices=[3.0, 2.0])
    seen = []
    rows = run_portfolio(config, on_grid_point=seen.append)
    assert len(seen) == 2
    assert len(rows) == 2 * 3 * 3
    assert listdir(tmpdir) == ["manifest.json", "mse_sweep.csv"]

    frame = pd.read_csv(tmpdir.join("mse_sweep.csv"))
    assert list(frame.columns) == MSE_COLUMNS
    assert set(frame["scenario_id"]) == {option_id(0), option_id(1), TOTAL_ID}
    assert set(frame["estimator"]) == {"LR", "TruLR-M", "TruLR-S"}
    total = frame[frame["scenario_id"] == TOTAL_ID]
    assert total["mean_tau"].isna().all()
    lr = frame[frame["estimator"] == "LR"]
    assert np.isinf(lr[lr["scenario_id"] != TOTAL_ID]["mean_tau"]).all()

    with open(tmpdir.join("manifest.json")) as f:
        manifest = json.load(f)
    assert manifest["reference_prices"] == [3.0, 2.0]
    assert manifest["reference_paths"] == 0
    assert manifest["week_p"] == [[4.0, 4.0], [pytest.approx(12.0), 4.0]]


def test_run_portfolio_does_not_depend_on_threads(tmpdir):
    one = run_portfolio(
        small_config(tmpdir.mkdir("one"), n_grid=[100], reference_prices=[3.0, 2.0])
    )
    many = run_portfolio(
        small_config(tmpdir.mkdir("many"), n_grid=[100], reference_prices=[3.0, 2.0]),
        threads=2,
    )
    assert [(r.scenario_id, r.estimator, r.mse) for r in one] == [
        (r.scenario_id, r.estimator, r.mse) for r in many
    ]
