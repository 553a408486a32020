import logging
import math

import numpy as np
import pytest
from scipy import optimize

from trulr.boundaries import (
    BERNSTEIN_CONVEXITY_MIN_B,
    BoundarySpec,
    MgfParams,
    ProblemConstants,
    bernstein_catalog,
    bernstein_constant_estimate,
    bound_constant,
    bound_shape,
    check_alpha_range,
    empirical_sup_norm,
    estimate_p_norm,
    mgf_params_catalog,
    scaled_bernstein_b,
    truncation_boundary,
    x_star,
)
from trulr.exceptions import (
    BoundaryConstraintError,
    InvalidParameterError,
    MissingConstantsError,
    UnsupportedOperationError,
)
from trulr.models.enums import BoundaryRule, TailKind

OPTIMAL = BoundarySpec(BoundaryRule.INF_OPTIMAL)
SIMPLE = BoundarySpec(BoundaryRule.INF_SIMPLE)


def constants(**overrides):
    values = dict(alpha=1.2, divergence=2.817, n=5000, delta=0.01)
    values.update(overrides)
    return ProblemConstants(**values)


def test_simple_boundary_value():
    tau = truncation_boundary(SIMPLE, constants())
    assert tau == pytest.approx((5000 * 2.817 / math.log(200)) ** (1 / 1.2), rel=1e-12)
    assert 700 < tau < 730


def test_boundary_scales_with_x_star():
    tau_simple = truncation_boundary(SIMPLE, constants())
    tau_optimal = truncation_boundary(OPTIMAL, constants())
    x = x_star(OPTIMAL, 1.2)
    assert tau_optimal == pytest.approx(x ** (2 / 1.2) * tau_simple, rel=1e-12)


def test_inf_optimal_known_values():
    assert x_star(OPTIMAL, 1.2) == pytest.approx(0.30039, abs=1e-5)
    assert x_star(OPTIMAL, 2.0) == pytest.approx(math.sqrt(3), rel=1e-12)


def test_pnorm_mgf_known_value():
    spec = BoundarySpec(BoundaryRule.PNORM_MGF_OPTIMAL, p=40)
    assert x_star(spec, 1.2) == pytest.approx(0.27955, abs=1e-5)


def test_bernstein_known_value():
    spec = BoundarySpec(BoundaryRule.PNORM_BERNSTEIN, p=40, b=1.0)
    assert x_star(spec, 1.2) == pytest.approx(0.20699, abs=1e-5)


def test_simple_rules_have_unit_x_star():
    assert x_star(SIMPLE, 1.5) == 1.0
    assert x_star(BoundarySpec(BoundaryRule.PNORM_SIMPLE, p=4), 2.0) == 1.0


def _random_valid_triples(count, seed=0):
    rng = np.random.default_rng(seed)
    triples = []
    while len(triples) < count:
        p = float(rng.uniform(2.5, 60))
        lo, hi = p / (p - 1), 2 * p / (p - 2)
        alpha = float(rng.uniform(lo, min(hi, 8.0)))
        if not lo < alpha < hi:
            continue
        b = float(rng.uniform(BERNSTEIN_CONVEXITY_MIN_B, 5.0))
        triples.append((alpha, p, b))
    return triples


def _specs(alpha, p, b):
    specs = [
        BoundarySpec(BoundaryRule.PNORM_MGF_OPTIMAL, p=p),
        BoundarySpec(BoundaryRule.PNORM_BERNSTEIN, p=p, b=b),
    ]
    if alpha <= 2:
        specs.append(OPTIMAL)
    return specs


def test_x_star_is_stationary_and_optimal():
    for alpha, p, b in _random_valid_triples(50):
        for spec in _specs(alpha, p, b):
            x = x_star(spec, alpha)
            assert x > 0
            shape = lambda t: float(bound_shape(spec.rule, t, alpha, p, b))
            step = 1e-6 * x
            slope = (shape(x + step) - shape(x - step)) / (2 * step)
            assert abs(slope) * x <= 1e-6 * shape(x)

            found = optimize.minimize_scalar(
                shape, bounds=(x / 50, x * 50), method="bounded", options={"xatol": 1e-10}
            )
            assert shape(x) <= found.fun * (1 + 1e-9)
            grid = np.geomspace(x / 20, x * 20, 401)
            assert shape(x) <= np.min(bound_shape(spec.rule, grid, alpha, p, b)) * (
                1 + 1e-12
            )


def test_bound_constant_is_shape_at_x_star():
    spec = BoundarySpec(BoundaryRule.PNORM_MGF_OPTIMAL, p=40)
    x = x_star(spec, 1.2)
    assert bound_constant(spec, 1.2) == pytest.approx(
        math.sqrt(2) * x ** (2 / 1.2 + 0.05 - 1) + x ** (2 / 1.2 + 0.05 - 2)
    )


def test_alpha_range_checks():
    with pytest.raises(BoundaryConstraintError, match="alpha in"):
        x_star(OPTIMAL, 2.5)
    with pytest.raises(BoundaryConstraintError, match="p/\\(p-1\\)"):
        check_alpha_range(BoundaryRule.PNORM_SIMPLE, 1.2, p=4)
    with pytest.raises(BoundaryConstraintError, match="p is required"):
        x_star(BoundarySpec(BoundaryRule.PNORM_MGF_OPTIMAL), 1.5)
    with pytest.raises(BoundaryConstraintError):
        check_alpha_range(BoundaryRule.INF_SIMPLE, 1.0)
    check_alpha_range(BoundaryRule.PNORM_SIMPLE, 2.1, p=4)


def test_p_comes_from_constants_when_spec_has_none():
    spec = BoundarySpec(BoundaryRule.PNORM_SIMPLE)
    tau = truncation_boundary(spec, constants(alpha=2.1, p=4.0))
    assert tau == pytest.approx((5000 * 2.817 / math.log(200)) ** (1 / 2.1), rel=1e-12)


def test_small_bernstein_b_warns(caplog):
    spec = BoundarySpec(BoundaryRule.PNORM_BERNSTEIN, p=40, b=0.01)
    with caplog.at_level(logging.WARNING):
        x = x_star(spec, 1.2)
    assert x > 0
    assert "convexity" in caplog.text


def test_fixed_rule():
    spec = BoundarySpec(BoundaryRule.FIXED, tau_fixed=3.0)
    assert truncation_boundary(spec, constants()) == 3.0
    assert truncation_boundary(BoundarySpec.lr(), constants()) == math.inf
    assert BoundarySpec.lr().is_lr
    with pytest.raises(UnsupportedOperationError):
        x_star(spec, 1.2)


def test_spec_validation():
    with pytest.raises(InvalidParameterError):
        BoundarySpec(BoundaryRule.PNORM_SIMPLE, p=2)
    with pytest.raises(InvalidParameterError):
        BoundarySpec(BoundaryRule.PNORM_BERNSTEIN, p=4)
    with pytest.raises(InvalidParameterError):
        BoundarySpec(BoundaryRule.FIXED)
    estimated = BoundarySpec(BoundaryRule.PNORM_BERNSTEIN, p=4, estimate_b=True)
    filled = estimated.with_b(1.5)
    assert filled.b == 1.5 and not filled.estimate_b


def test_problem_constants_validation():
    with pytest.raises(InvalidParameterError):
        constants(alpha=1.0)
    with pytest.raises(InvalidParameterError):
        constants(delta=1.0)
    with pytest.raises(InvalidParameterError):
        constants(divergence=0.5)
    with pytest.raises(InvalidParameterError):
        constants(n=0)
    with pytest.raises(InvalidParameterError):
        constants(h_p_norm=0.0)
    with pytest.raises(MissingConstantsError, match="h_inf_norm"):
        constants().require("something", "h_inf_norm")
    assert constants().log_term == pytest.approx(math.log(200))


def test_bernstein_scaling_is_applied_with_h_p_norm():
    spec = BoundarySpec(BoundaryRule.PNORM_BERNSTEIN, p=40, b=1.7)
    c = constants(h_p_norm=2.5, p=40.0)
    scaled = scaled_bernstein_b(1.7, 1.2, 2.817, 40, 2.5)
    assert scaled == pytest.approx(1.7 * 2.817 ** (1 / 40) / 2.5)
    x = x_star(spec, 1.2, b=scaled)
    expected = (x**2 * 5000 * 2.817 / math.log(200)) ** (1 / 1.2)
    assert truncation_boundary(spec, c) == pytest.approx(expected, rel=1e-12)
    # without ||h||_p the raw b is used
    raw = x_star(spec, 1.2)
    assert truncation_boundary(spec, constants()) == pytest.approx(
        (raw**2 * 5000 * 2.817 / math.log(200)) ** (1 / 1.2), rel=1e-12
    )


def test_bernstein_constant_estimate():
    assert bernstein_constant_estimate(np.ones(1000)) == pytest.approx(2.0)
    rng = np.random.default_rng(0)
    # for Exp(1), max_k (k!)^(1/k)/k is attained at k = 1
    b = bernstein_constant_estimate(rng.exponential(size=200_000), max_k=6)
    assert b == pytest.approx(2.0, rel=0.02)
    with pytest.raises(InvalidParameterError):
        bernstein_constant_estimate(np.ones(999))
    with pytest.raises(InvalidParameterError):
        bernstein_constant_estimate(np.ones(1000), max_k=1)


def test_mgf_catalog():
    assert mgf_params_catalog(TailKind.BOUNDED, bound=2.0) == MgfParams(4.0, 0.0)
    assert mgf_params_catalog(TailKind.HOEFFDING, lower=0.0, upper=1.0) == MgfParams(
        0.25, 0.0
    )
    assert mgf_params_catalog(TailKind.NORMAL, variance=3.0) == MgfParams(3.0, 0.0)
    assert mgf_params_catalog(TailKind.EXPONENTIAL, mean=0.5) == MgfParams(1.0, 1.0)
    with pytest.raises(InvalidParameterError):
        mgf_params_catalog(TailKind.BOUNDED)


def test_bernstein_catalog():
    assert bernstein_catalog(TailKind.BOUNDED, bound=3.0) == 1.0
    assert bernstein_catalog(TailKind.NORMAL, sigma=1.7) == 1.7
    assert bernstein_catalog(TailKind.EXPONENTIAL, rate=4.0) == 0.25
    with pytest.raises(UnsupportedOperationError):
        bernstein_catalog(TailKind.HOEFFDING, lower=0, upper=1)


def test_norm_helpers():
    assert estimate_p_norm([1.0, -1.0, 1.0], 4) == pytest.approx(1.0)
    assert estimate_p_norm([0.0, 2.0], 2) == pytest.approx(math.sqrt(2))
    assert estimate_p_norm([0.0, 0.0], 3) == 0.0
    assert estimate_p_norm([1e200, 1e200], 40) == pytest.approx(1e200)
    assert empirical_sup_norm([-3.0, 2.0]) == 3.0
    with pytest.raises(InvalidParameterError):
        estimate_p_norm([], 2)
