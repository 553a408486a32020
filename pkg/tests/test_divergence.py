import math

import numpy as np
import pytest
from scipy import integrate

from trulr.divergence import (
    AlphaDivergenceResult,
    alpha_divergence_closed,
    alpha_divergence_mc,
    log_alpha_divergence,
    validate_divergence,
)
from trulr.exceptions import (
    DivergenceUndefinedError,
    InvalidParameterError,
    UnsupportedOperationError,
)
from trulr.models.distributions import (
    Beta,
    ChiSquared,
    FiniteDiscrete,
    MvNormal,
    Normal,
    UniformLaplaceMixture,
)
from trulr.models.enums import DivergenceMethod
from trulr.models.streams import RandomStream


def integrand(target, behavior, alpha):
    def f(x):
        return math.exp(
            alpha * target.log_density(x) + (1 - alpha) * behavior.log_density(x)
        )

    return f


def test_beta_matches_quadrature():
    target, behavior = Beta(16, 21), Beta(90, 120)
    expected = integrate.quad(integrand(target, behavior, 1.2), 0, 1, limit=200)[0]
    assert alpha_divergence_closed(target, behavior, 1.2).value == pytest.approx(
        expected, rel=1e-8
    )


def test_normal_matches_quadrature():
    for target, behavior, alpha in [
        (Normal(0.2, 4.0), Normal(0.0, 1.7), 1.2),
        (Normal(0.6, 2.0), Normal(1.0, 1.5), 2.1),
    ]:
        expected = integrate.quad(
            integrand(target, behavior, alpha), -math.inf, math.inf
        )[0]
        value = alpha_divergence_closed(target, behavior, alpha).value
        assert value == pytest.approx(expected, rel=1e-8)


def test_normal_setting_value():
    value = alpha_divergence_closed(Normal(0.2, 4.0), Normal(0.0, 1.7), 1.2).value
    assert value == pytest.approx(2.8173, abs=1e-3)


@pytest.mark.parametrize("k0,k,alpha", [(12, 3, 1.3), (18, 10, 2.2)])
def test_chi_squared_matches_quadrature(k0, k, alpha):
    target, behavior = ChiSquared(k), ChiSquared(k0)
    s = ((1 - alpha) * k0 + alpha * k) / 2
    f = integrand(target, behavior, alpha)

    # x = t^(1/s) removes the x^(s-1) singularity at the origin
    def g(t):
        return f(t ** (1 / s)) * (1 / s) * t ** (1 / s - 1) if t > 0 else 0.0

    expected = integrate.quad(g, 0, 1, limit=200)[0] + integrate.quad(
        g, 1, 4, limit=200
    )[0]
    value = alpha_divergence_closed(target, behavior, alpha).value
    assert value == pytest.approx(expected, rel=1e-7)


def test_identical_measures_have_divergence_one():
    for dist in [Beta(3, 4), Normal(1.0, 2.0), ChiSquared(5)]:
        assert alpha_divergence_closed(dist, dist, 1.7).value == pytest.approx(1.0)


def test_mv_normal_diagonal_is_product_of_scalars():
    target = MvNormal([0.2, 1.0], np.diag([16.0, 1.0]))
    behavior = MvNormal([0.0, 0.5], np.diag([2.89, 0.81]))
    scalar = alpha_divergence_closed(
        Normal(0.2, 4.0), Normal(0.0, 1.7), 1.2
    ).value * alpha_divergence_closed(Normal(1.0, 1.0), Normal(0.5, 0.9), 1.2).value
    assert alpha_divergence_closed(target, behavior, 1.2).value == pytest.approx(
        scalar, rel=1e-10
    )


def test_finite_discrete_is_direct_sum():
    target = FiniteDiscrete([-1, 0, 1], [0.3, 0.4, 0.3])
    behavior = FiniteDiscrete([-1, 0, 1], [0.1, 0.8, 0.1])
    expected = 2 * 0.3**1.5 * 0.1**-0.5 + 0.4**1.5 * 0.8**-0.5
    assert alpha_divergence_closed(target, behavior, 1.5).value == pytest.approx(expected)


def test_uniform_laplace_matches_quadrature():
    target, behavior = UniformLaplaceMixture(1.5, 0.4), UniformLaplaceMixture(1.5, 0.1)
    f = integrand(target, behavior, 2.5)
    expected = 2 * integrate.quad(f, 0, 1.5)[0] + 2 * integrate.quad(f, 1.5, math.inf)[0]
    assert alpha_divergence_closed(target, behavior, 2.5).value == pytest.approx(
        expected, rel=1e-9
    )


def test_undefined_regions_name_the_condition():
    with pytest.raises(DivergenceUndefinedError, match="sigma_alpha"):
        alpha_divergence_closed(Normal(0, 4), Normal(0, 1), 2.0)
    with pytest.raises(DivergenceUndefinedError, match="a_alpha"):
        alpha_divergence_closed(Beta(1, 1), Beta(10, 10), 2.0)
    with pytest.raises(DivergenceUndefinedError, match="k_alpha"):
        alpha_divergence_closed(ChiSquared(1), ChiSquared(20), 2.0)
    with pytest.raises(DivergenceUndefinedError):
        alpha_divergence_closed(
            MvNormal([0.0], [[16.0]]), MvNormal([0.0], [[1.0]]), 2.0
        )


def test_bad_alpha_and_mixed_families():
    with pytest.raises(InvalidParameterError):
        alpha_divergence_closed(Normal(0, 1), Normal(0, 1), 1.0)
    with pytest.raises(UnsupportedOperationError):
        log_alpha_divergence(Normal(0, 1), Beta(1, 1), 1.5)


def test_huge_divergence_is_inf_with_finite_log():
    result = alpha_divergence_closed(Normal(40, 1), Normal(0, 1), 2.0)
    assert result.value == math.inf
    assert result.log_value == pytest.approx(1600.0)


def test_result_requires_std_error_iff_monte_carlo():
    with pytest.raises(InvalidParameterError):
        AlphaDivergenceResult(1.5, 1.0, DivergenceMethod.MONTE_CARLO)
    with pytest.raises(InvalidParameterError):
        AlphaDivergenceResult(1.5, 1.0, DivergenceMethod.CLOSED_FORM, std_error=0.1)


def test_monte_carlo_agrees_with_closed_form():
    target, behavior = Normal(0.5, 1.0), Normal(0.0, 1.0)
    check = validate_divergence(target, behavior, 2.0, 400_000, RandomStream(0))
    assert check.closed.value == pytest.approx(math.exp(0.25))
    assert check.mc.method == DivergenceMethod.MONTE_CARLO
    assert check.mc.sample_size == 400_000
    assert abs(check.z_score) <= 4
    assert not check.flagged


def test_monte_carlo_is_deterministic_and_chunk_safe(monkeypatch):
    import trulr.divergence as divergence

    target, behavior = Beta(3, 4), Beta(4, 4)
    whole = alpha_divergence_mc(target, behavior, 1.5, 5000, RandomStream(9))
    again = alpha_divergence_mc(target, behavior, 1.5, 5000, RandomStream(9))
    assert whole.value == again.value

    monkeypatch.setattr(divergence, "MC_CHUNK_SIZE", 1000)
    chunked = alpha_divergence_mc(target, behavior, 1.5, 50_000, RandomStream(9))
    closed = alpha_divergence_closed(target, behavior, 1.5).value
    assert abs(chunked.value - closed) <= 4 * chunked.std_error


def test_monte_carlo_needs_two_draws():
    with pytest.raises(InvalidParameterError):
        alpha_divergence_mc(Normal(0, 1), Normal(0, 1), 1.5, 1, RandomStream(0))
