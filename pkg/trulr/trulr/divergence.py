"""
Alpha-divergence I_alpha(P_theta || P_theta0) = E_theta0[l(X)^alpha].

Closed forms for every supported family (assembled in log-space), a Monte
Carlo oracle that accumulates l^alpha with a running log-shift, and a
comparator between the two.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.special import betaln, gammaln, logsumexp

from trulr.exceptions import (
    AbsoluteContinuityError,
    DivergenceUndefinedError,
    InvalidParameterError,
    NumericOverflowError,
    UnsupportedOperationError,
)
from trulr.models.distributions import (
    Beta,
    ChiSquared,
    FiniteDiscrete,
    MvNormal,
    Normal,
    UniformLaplaceMixture,
    log_likelihood_ratio,
)
from trulr.models.enums import DivergenceMethod
from trulr.models.streams import RandomStream

logger = logging.getLogger(__name__)

MC_CHUNK_SIZE = 1 << 20
Z_SCORE_FLAG = 3.0


@dataclass(frozen=True)
class AlphaDivergenceResult:
    alpha: float
    value: float
    method: DivergenceMethod
    std_error: Optional[float] = None
    sample_size: Optional[int] = None
    log_value: Optional[float] = None

    def __post_init__(self):
        has_se = self.std_error is not None
        if has_se != (self.method == DivergenceMethod.MONTE_CARLO):
            raise InvalidParameterError("std_error is present iff method is monte_carlo")


def _check_alpha(alpha):
    if not alpha > 1:
        raise InvalidParameterError(f"alpha must be > 1, got {alpha}")


def _log_beta(target, behavior, alpha):
    a_alpha = alpha * target.a + (1 - alpha) * behavior.a
    b_alpha = alpha * target.b + (1 - alpha) * behavior.b
    if a_alpha <= 0 or b_alpha <= 0:
        raise DivergenceUndefinedError(
            f"need a_alpha > 0 and b_alpha > 0, got a_alpha={a_alpha:.6g}, b_alpha={b_alpha:.6g}"
        )
    log_b = betaln(target.a, target.b)
    return (alpha - 1) * (betaln(behavior.a, behavior.b) - log_b) + (
        betaln(a_alpha, b_alpha) - log_b
    )


def _log_normal(target, behavior, alpha):
    # Exponent is alpha*(alpha-1)*(mu0-mu)^2 / (2 sigma_alpha^2): the 1-d case
    # of the multivariate formula.
    var_alpha = (1 - alpha) * target.sigma**2 + alpha * behavior.sigma**2
    if var_alpha <= 0:
        raise DivergenceUndefinedError(
            f"need sigma_alpha^2 = (1-alpha)sigma^2 + alpha*sigma0^2 > 0, got {var_alpha:.6g}"
        )
    return (
        alpha * (alpha - 1) * (behavior.mu - target.mu) ** 2 / (2 * var_alpha)
        + (1 - alpha) * math.log(target.sigma)
        + alpha * math.log(behavior.sigma)
        - 0.5 * math.log(var_alpha)
    )


def _log_chi_squared(target, behavior, alpha):
    k_alpha = (1 - alpha) * behavior.k + alpha * target.k
    if k_alpha <= 0:
        raise DivergenceUndefinedError(
            f"need k_alpha = (1-alpha)k0 + alpha*k > 0, got {k_alpha:.6g}"
        )
    log_g = gammaln(target.k / 2)
    return (alpha - 1) * (gammaln(behavior.k / 2) - log_g) + (
        gammaln(k_alpha / 2) - log_g
    )


def _log_mv_normal(target, behavior, alpha):
    if target.dimension != behavior.dimension:
        raise InvalidParameterError("mv-normal dimensions differ")
    cov_alpha = (1 - alpha) * target.cov + alpha * behavior.cov
    try:
        chol_alpha = linalg.cholesky(cov_alpha, lower=True)
    except linalg.LinAlgError:
        raise DivergenceUndefinedError(
            "need Sigma_alpha = (1-alpha)Sigma + alpha*Sigma_j positive definite"
        )
    diff = target.mean_vector - behavior.mean_vector
    solved = linalg.solve_triangular(chol_alpha, diff, lower=True)
    log_det_alpha = 2.0 * float(np.sum(np.log(np.diag(chol_alpha))))
    return (
        0.5 * alpha * (alpha - 1) * float(solved @ solved)
        + 0.5 * (1 - alpha) * target.log_det
        + 0.5 * alpha * behavior.log_det
        - 0.5 * log_det_alpha
    )


def _log_finite_discrete(target, behavior, alpha):
    mass = target.probs > 0
    support = target.support[mass]
    log_p = np.log(target.probs[mass])
    log_p0 = behavior.log_density(support)
    if np.any(np.isneginf(log_p0)):
        raise AbsoluteContinuityError(
            "behavior mass must be positive wherever target mass is positive"
        )
    return float(logsumexp(alpha * log_p + (1 - alpha) * log_p0))


def _log_uniform_laplace(target, behavior, alpha):
    if target.a != behavior.a:
        raise UnsupportedOperationError("closed form needs equal half-widths a")
    terms = []
    for p, p0 in ((target.theta, behavior.theta), (1 - target.theta, 1 - behavior.theta)):
        if p == 0:
            continue
        if p0 == 0:
            raise AbsoluteContinuityError(
                "behavior component weight is zero where target weight is positive"
            )
        terms.append(alpha * math.log(p) + (1 - alpha) * math.log(p0))
    return float(logsumexp(terms))


CLOSED_FORMS = {
    Beta: _log_beta,
    Normal: _log_normal,
    ChiSquared: _log_chi_squared,
    MvNormal: _log_mv_normal,
    FiniteDiscrete: _log_finite_discrete,
    UniformLaplaceMixture: _log_uniform_laplace,
}


def log_alpha_divergence(target, behavior, alpha) -> float:
    _check_alpha(alpha)
    if type(target) is not type(behavior) or type(target) not in CLOSED_FORMS:
        raise UnsupportedOperationError(
            f"no closed form for {type(target).__name__} vs {type(behavior).__name__}"
        )
    return float(CLOSED_FORMS[type(target)](target, behavior, alpha))


def alpha_divergence_closed(target, behavior, alpha) -> AlphaDivergenceResult:
    log_value = log_alpha_divergence(target, behavior, alpha)
    return AlphaDivergenceResult(
        alpha=alpha,
        value=math.exp(log_value) if log_value < 709.0 else math.inf,
        method=DivergenceMethod.CLOSED_FORM,
        log_value=log_value,
    )


def alpha_divergence_mc(
    target, behavior, alpha, m: int, stream: RandomStream
) -> AlphaDivergenceResult:
    """Sample mean of l(X)^alpha over m draws from the behavior measure.

    Draws are processed in chunks; sums of l^alpha and l^(2 alpha) are kept
    relative to the running maximum log-weight so nothing overflows before
    the final scale-back.
    """
    _check_alpha(alpha)
    if m < 2:
        raise InvalidParameterError(f"m must be >= 2, got {m}")

    shift = -math.inf
    s1 = 0.0
    s2 = 0.0
    remaining = m
    while remaining > 0:
        size = min(MC_CHUNK_SIZE, remaining)
        remaining -= size
        x = behavior.sample(stream, size)
        log_terms = alpha * log_likelihood_ratio(target, behavior, x)
        chunk_max = float(np.max(log_terms))
        if chunk_max > shift:
            if math.isfinite(shift):
                rescale = math.exp(shift - chunk_max)
                s1 *= rescale
                s2 *= rescale * rescale
            shift = chunk_max
        if not math.isfinite(shift):
            continue
        scaled = np.exp(log_terms - shift)
        s1 += float(np.sum(scaled))
        s2 += float(np.sum(scaled * scaled))

    mean_scaled = s1 / m
    var_scaled = max(s2 / m - mean_scaled * mean_scaled, 0.0) * m / (m - 1)
    if mean_scaled == 0.0:
        log_value = -math.inf
    else:
        log_value = shift + math.log(mean_scaled)
    if log_value >= 709.0 or shift >= 709.0:
        raise NumericOverflowError(
            "Monte Carlo divergence overflows float64", max_log_weight=shift / alpha
        )
    scale = math.exp(shift) if math.isfinite(shift) else 0.0
    logger.debug("mc divergence: m=%d, max log l^alpha=%.4g", m, shift)
    return AlphaDivergenceResult(
        alpha=alpha,
        value=math.exp(log_value),
        method=DivergenceMethod.MONTE_CARLO,
        std_error=scale * math.sqrt(var_scaled / m),
        sample_size=m,
        log_value=log_value,
    )


@dataclass(frozen=True)
class DivergenceValidation:
    closed: AlphaDivergenceResult
    mc: AlphaDivergenceResult
    z_score: float

    @property
    def flagged(self) -> bool:
        return abs(self.z_score) > Z_SCORE_FLAG


def validate_divergence(target, behavior, alpha, m, stream) -> DivergenceValidation:
    closed = alpha_divergence_closed(target, behavior, alpha)
    mc = alpha_divergence_mc(target, behavior, alpha, m, stream)
    gap = closed.value - mc.value
    if mc.std_error > 0:
        z_score = gap / mc.std_error
    else:
        z_score = 0.0 if gap == 0 else math.copysign(math.inf, gap)
    result = DivergenceValidation(closed, mc, z_score)
    if result.flagged:
        logger.warning(
            "closed form %.6g and Monte Carlo %.6g disagree (z=%.2f)",
            closed.value,
            mc.value,
            z_score,
        )
    return result
