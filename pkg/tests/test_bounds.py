import math

import numpy as np
import pytest

from trulr.boundaries import (
    BoundarySpec,
    MgfParams,
    ProblemConstants,
    bound_constant,
    scaled_bernstein_b,
    truncation_boundary,
)
from trulr.bounds import evaluate_bound, leading_order, variance_mgf_params
from trulr.divergence import alpha_divergence_closed
from trulr.exceptions import MissingConstantsError
from trulr.models.distributions import Beta, likelihood_ratio
from trulr.models.enums import BoundaryRule, BoundId
from trulr.models.streams import RandomStream

INF_CONSTANTS = ProblemConstants(
    alpha=1.2, divergence=2.5, n=5000, delta=0.01, h_inf_norm=1.0
)
P_CONSTANTS = ProblemConstants(
    alpha=1.2, divergence=2.817, n=50000, delta=0.01, h_p_norm=3.0, p=40.0
)


def test_lr_bounds():
    c = ProblemConstants(
        alpha=1.5, divergence=4.0, n=100, delta=0.05, h_inf_norm=2.0, h_p_norm=1.5
    )
    assert evaluate_bound(BoundId.LR_CONC_INF, c) == pytest.approx(
        2.0 * (4 * 4.0 / (0.05 * 100**0.5)) ** (1 / 1.5)
    )
    assert evaluate_bound(BoundId.LR_CONC_P, c) == pytest.approx(
        2 / math.sqrt(100 * 0.05) * 1.5 * 4.0 ** (1 / 1.5)
    )
    assert evaluate_bound(BoundId.LR_VAR_P, c) == pytest.approx(
        1.5**2 * 4.0 ** (2 / 1.5) / 100
    )


def test_truncated_bias_and_variance():
    c = INF_CONSTANTS
    assert evaluate_bound(BoundId.TRULR_BIAS_INF, c, tau=10.0) == pytest.approx(
        10.0**-0.2 * 2.5
    )
    assert evaluate_bound(BoundId.TRULR_VAR_INF, c, tau=10.0) == pytest.approx(
        10.0**0.8 * 2.5 / 5000
    )
    c = P_CONSTANTS
    assert evaluate_bound(BoundId.TRULR_BIAS_P, c, tau=10.0) == pytest.approx(
        3.0 * 10.0 ** (1 - 1.2 + 0.03) * 2.817 ** (1 - 1 / 40)
    )
    assert evaluate_bound(BoundId.TRULR_VAR_P, c, tau=10.0) == pytest.approx(
        9.0 * 10.0 ** (2 - 1.2 + 0.06) * 2.817 ** (1 - 2 / 40) / 50000
    )


def test_inf_full_bound_at_optimal_boundary_matches_bound_constant():
    spec = BoundarySpec(BoundaryRule.INF_OPTIMAL)
    c = INF_CONSTANTS
    tau = truncation_boundary(spec, c)
    full = evaluate_bound(BoundId.TRULR_CONC_INF_FULL, c, tau=tau)
    expected = bound_constant(spec, c.alpha) * leading_order(c, c.h_inf_norm, 1 - 1 / c.alpha)
    assert full == pytest.approx(expected, rel=1e-9)


def test_mgf_full_bound_at_optimal_boundary_matches_bound_constant():
    spec = BoundarySpec(BoundaryRule.PNORM_MGF_OPTIMAL, p=40)
    c = P_CONSTANTS
    tau = truncation_boundary(spec, c)
    full = evaluate_bound(BoundId.TRULR_CONC_MGF_FULL, c, tau=tau)
    exponent = 1 - 1 / c.alpha - 1 / c.p
    expected = bound_constant(spec, c.alpha) * leading_order(c, c.h_p_norm, exponent)
    assert full == pytest.approx(expected, rel=1e-9)


def test_bernstein_full_bound_at_optimal_boundary_matches_bound_constant():
    spec = BoundarySpec(BoundaryRule.PNORM_BERNSTEIN, p=40, b=1.7)
    c = P_CONSTANTS
    tau = truncation_boundary(spec, c)
    full = evaluate_bound(BoundId.TRULR_CONC_BERNSTEIN_FULL, c, tau=tau, b=1.7)
    scaled = scaled_bernstein_b(1.7, c.alpha, c.divergence, c.p, c.h_p_norm)
    exponent = 1 - 1 / c.alpha - 1 / c.p
    expected = bound_constant(spec, c.alpha, b=scaled) * leading_order(
        c, c.h_p_norm, exponent
    )
    assert full == pytest.approx(expected, rel=1e-9)


def test_explicit_mgf_parameters():
    c = P_CONSTANTS
    mgf = MgfParams(sigma_sq=2.0, lambda_cap=50.0)
    tau = 20.0
    log_term = math.log(200)
    deviation = max(
        math.sqrt(2 * 2.0 * log_term / c.n), 2 * 50.0 * log_term / c.n
    )
    assert evaluate_bound(
        BoundId.TRULR_CONC_MGF_FULL, c, tau=tau, mgf=mgf
    ) == pytest.approx(deviation + evaluate_bound(BoundId.TRULR_BIAS_P, c, tau=tau))
    default = variance_mgf_params(c, tau)
    assert default.lambda_cap == 0.0
    assert default.sigma_sq == pytest.approx(
        evaluate_bound(BoundId.TRULR_VAR_P, c, tau=tau) * c.n
    )


def test_missing_constants_are_named():
    with pytest.raises(MissingConstantsError, match="h_inf_norm"):
        evaluate_bound(BoundId.LR_CONC_INF, P_CONSTANTS)
    with pytest.raises(MissingConstantsError, match="h_p_norm"):
        evaluate_bound(BoundId.TRULR_BIAS_P, INF_CONSTANTS, tau=2.0)
    with pytest.raises(MissingConstantsError, match="tau"):
        evaluate_bound(BoundId.TRULR_VAR_INF, INF_CONSTANTS)
    with pytest.raises(MissingConstantsError, match="b"):
        evaluate_bound(BoundId.TRULR_CONC_BERNSTEIN_FULL, P_CONSTANTS, tau=2.0)


def test_bias_and_variance_bounds_hold_empirically():
    target, behavior = Beta(16, 21), Beta(90, 120)
    alpha = 1.2
    divergence = alpha_divergence_closed(target, behavior, alpha).value
    c = ProblemConstants(
        alpha=alpha, divergence=divergence, n=1, delta=0.01, h_inf_norm=1.0
    )
    x = behavior.sample(RandomStream(4), 400_000)
    summand_weights = likelihood_ratio(target, behavior, x)
    for tau in [0.5, 2.0, 10.0]:
        summands = x * np.minimum(summand_weights, tau)
        mean = summands.mean()
        se = summands.std(ddof=1) / math.sqrt(summands.size)
        bias_bound = evaluate_bound(BoundId.TRULR_BIAS_INF, c, tau=tau)
        assert abs(mean - target.mean()) <= bias_bound + 4 * se
        assert summands.var() <= evaluate_bound(BoundId.TRULR_VAR_INF, c, tau=tau)
