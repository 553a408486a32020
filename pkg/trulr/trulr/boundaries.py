"""
Truncation-boundary rules.

Every rule picks tau = (x*)^(2/alpha) * (n * I_alpha / ln(2/delta))^(1/alpha)
and differs only in x*. The "simple" rules take x* = 1; the optimal rules
minimize the leading constant of the matching concentration bound in
closed form. Also home to the Bernstein-constant estimator and the
(sigma^2, Lambda) catalog for the MGF condition.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from trulr.exceptions import (
    BoundaryConstraintError,
    InvalidParameterError,
    MissingConstantsError,
    UnsupportedOperationError,
)
from trulr.models.enums import INF_NORM_RULES, PNORM_RULES, BoundaryRule, TailKind

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
BERNSTEIN_CONVEXITY_MIN_B = 1.0 / 18.0
DEFAULT_MAX_K = 10
DEFAULT_MULTIPLIER = 2.0
DEFAULT_PILOT_SIZE = 100_000
MIN_BERNSTEIN_SAMPLE = 1_000


@dataclass(frozen=True)
class BoundarySpec:
    """Which truncation rule to apply.

    For TruLR-E (pnorm_bernstein with estimate_b) b is filled in from a
    pilot run via `with_b` before the boundary is computed.
    """

    rule: BoundaryRule
    p: Optional[float] = None
    b: Optional[float] = None
    tau_fixed: Optional[float] = None
    estimate_b: bool = False

    def __post_init__(self):
        if self.rule in PNORM_RULES and self.p is not None and not self.p > 2:
            raise InvalidParameterError(f"p must be > 2, got {self.p}")
        if self.rule == BoundaryRule.PNORM_BERNSTEIN:
            if self.b is None and not self.estimate_b:
                raise InvalidParameterError("pnorm_bernstein needs b (or estimate_b)")
            if self.b is not None and not self.b > 0:
                raise InvalidParameterError(f"b must be > 0, got {self.b}")
        if self.rule == BoundaryRule.FIXED:
            if self.tau_fixed is None or not self.tau_fixed > 0:
                raise InvalidParameterError("fixed rule needs tau_fixed > 0")

    @classmethod
    def lr(cls):
        return cls(BoundaryRule.FIXED, tau_fixed=math.inf)

    def with_b(self, b):
        return dataclasses.replace(self, b=b, estimate_b=False)

    @property
    def is_lr(self):
        return self.rule == BoundaryRule.FIXED and self.tau_fixed == math.inf


@dataclass(frozen=True)
class ProblemConstants:
    alpha: float
    divergence: float
    n: int
    delta: float
    h_inf_norm: Optional[float] = None
    h_p_norm: Optional[float] = None
    p: Optional[float] = None

    def __post_init__(self):
        if not self.alpha > 1:
            raise InvalidParameterError(f"alpha must be > 1, got {self.alpha}")
        if not self.divergence >= 1 - 1e-12:
            raise InvalidParameterError(
                f"divergence must be >= 1, got {self.divergence}"
            )
        if self.n < 1:
            raise InvalidParameterError(f"n must be >= 1, got {self.n}")
        if not 0 < self.delta < 1:
            raise InvalidParameterError(f"delta must be in (0, 1), got {self.delta}")
        for name in ("h_inf_norm", "h_p_norm"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise InvalidParameterError(f"{name} must be > 0, got {value}")

    @property
    def log_term(self):
        """ln(2/delta)"""
        return math.log(2.0 / self.delta)

    def require(self, what, *names):
        missing = [name for name in names if getattr(self, name) is None]
        if missing:
            raise MissingConstantsError(what, missing)


@dataclass(frozen=True)
class MgfParams:
    sigma_sq: float
    lambda_cap: float

    def __post_init__(self):
        if self.sigma_sq < 0 or self.lambda_cap < 0:
            raise InvalidParameterError(f"MGF parameters must be >= 0: {self}")


def check_alpha_range(rule: BoundaryRule, alpha, p=None):
    if not alpha > 1:
        raise BoundaryConstraintError(f"{rule.value}: need alpha > 1, got {alpha}")
    if rule in INF_NORM_RULES and alpha > 2:
        raise BoundaryConstraintError(
            f"{rule.value}: need alpha in (1, 2], got {alpha}"
        )
    if rule in PNORM_RULES:
        if p is None:
            raise BoundaryConstraintError(f"{rule.value}: p is required")
        if not p > 2:
            raise BoundaryConstraintError(f"{rule.value}: need p > 2, got {p}")
        lo, hi = p / (p - 1), 2 * p / (p - 2)
        if not lo < alpha < hi:
            raise BoundaryConstraintError(
                f"{rule.value}: need p/(p-1) < alpha < 2p/(p-2), "
                f"i.e. {lo:.6g} < alpha < {hi:.6g}, got alpha={alpha}"
            )


def _resolve(spec, p, b):
    p = spec.p if spec.p is not None else p
    b = spec.b if b is None else b
    return p, b


def x_star(spec: BoundarySpec, alpha, p=None, b=None) -> float:
    """Minimizer of the bound constant for the rule (1 for simple rules).

    For pnorm_bernstein, b is the already-scaled constant that appears in
    the bound shape (see scaled_bernstein_b); an explicit b argument takes
    precedence over spec.b.
    """
    rule = spec.rule
    if rule == BoundaryRule.FIXED:
        raise UnsupportedOperationError("fixed rule has no x*")
    p, b = _resolve(spec, p, b)
    check_alpha_range(rule, alpha, p)

    if rule in (BoundaryRule.INF_SIMPLE, BoundaryRule.PNORM_SIMPLE):
        return 1.0
    if rule == BoundaryRule.INF_OPTIMAL:
        half = alpha / 2 - 1
        root = math.sqrt(2 * half**2 + (4.0 / 3.0) * (alpha - 1))
        return (3 * SQRT2 * half + 3 * root) / 2
    if rule == BoundaryRule.PNORM_MGF_OPTIMAL:
        return (alpha - 1 - alpha / p) / (SQRT2 * (1 - alpha / 2 + alpha / p))

    # pnorm_bernstein
    if b is None or not b > 0:
        raise BoundaryConstraintError("pnorm_bernstein: need b > 0")
    if b < BERNSTEIN_CONVEXITY_MIN_B:
        logger.warning(
            "Bernstein b=%.4g < 1/18: convexity of the bound is not guaranteed", b
        )
    c = 1 - alpha / 2 + alpha / p
    d = 1 + alpha / p
    e = 1 - alpha + alpha / p
    return (-SQRT2 * c + math.sqrt(2 * c * c - 4 * b * d * e)) / (2 * b * d)


def bound_shape(rule: BoundaryRule, x, alpha, p=None, b=None):
    """Leading constant of the rule's concentration bound as a function of x.

    Its value at x* is the bound constant; tests use it to check optimality
    and stationarity of x*.
    """
    x = np.asarray(x, dtype=np.float64)
    if rule in INF_NORM_RULES:
        k = 2 / alpha
        value = SQRT2 * x ** (k - 1) + x**k / 3 + x ** (k - 2)
    elif rule in (BoundaryRule.PNORM_SIMPLE, BoundaryRule.PNORM_MGF_OPTIMAL):
        k = 2 / alpha + 2 / p
        value = SQRT2 * x ** (k - 1) + x ** (k - 2)
    elif rule == BoundaryRule.PNORM_BERNSTEIN:
        k = 2 / alpha + 2 / p
        value = SQRT2 * x ** (k - 1) + b * x**k + x ** (k - 2)
    else:
        raise UnsupportedOperationError(f"{rule.value} has no bound shape")
    return value[()] if value.ndim == 0 else value


def bound_constant(spec: BoundarySpec, alpha, p=None, b=None) -> float:
    p, b = _resolve(spec, p, b)
    x = x_star(spec, alpha, p, b)
    return float(bound_shape(spec.rule, x, alpha, p, b))


def scaled_bernstein_b(b_h, alpha, divergence, p, h_p_norm) -> float:
    """b as it enters x*: b_h * I_alpha^(1/p) / ||h||_p."""
    return b_h * divergence ** (1.0 / p) / h_p_norm


def truncation_boundary(spec: BoundarySpec, constants: ProblemConstants) -> float:
    if spec.rule == BoundaryRule.FIXED:
        return float(spec.tau_fixed)

    p = spec.p if spec.p is not None else constants.p
    b = spec.b
    if spec.rule == BoundaryRule.PNORM_BERNSTEIN:
        if b is None:
            raise MissingConstantsError("pnorm_bernstein", ["b"])
        if constants.h_p_norm is not None:
            b = scaled_bernstein_b(
                b, constants.alpha, constants.divergence, p, constants.h_p_norm
            )

    x = x_star(spec, constants.alpha, p, b)
    alpha = constants.alpha
    log_tau = (2 / alpha) * math.log(x) + (
        math.log(constants.n) + math.log(constants.divergence) - math.log(constants.log_term)
    ) / alpha
    tau = math.exp(log_tau)
    logger.debug(
        "tau=%.6g for %s (x*=%.6g, n=%d, I=%.6g)",
        tau,
        spec.rule.value,
        x,
        constants.n,
        constants.divergence,
    )
    return tau


def _absolute_moment_terms(sample, max_k):
    y = np.abs(np.asarray(sample, dtype=np.float64).ravel())
    if not np.all(np.isfinite(y)):
        raise InvalidParameterError("sample contains non-finite values")
    with np.errstate(divide="ignore"):
        log_y = np.log(y)
    log_n = math.log(y.size)
    terms = []
    for k in range(1, max_k + 1):
        log_moment = float(logsumexp(k * log_y)) - log_n
        terms.append(math.exp(log_moment / k) / k)
    return terms


def bernstein_constant_estimate(
    sample, max_k: int = DEFAULT_MAX_K, multiplier: float = DEFAULT_MULTIPLIER
) -> float:
    """multiplier * max_k' k'^-1 (mean |Y|^k')^(1/k'): a plug-in psi_1-norm."""
    if len(sample) < MIN_BERNSTEIN_SAMPLE:
        raise InvalidParameterError(
            f"need at least {MIN_BERNSTEIN_SAMPLE} draws, got {len(sample)}"
        )
    if max_k < 2:
        raise InvalidParameterError(f"max_k must be >= 2, got {max_k}")
    estimate = multiplier * max(_absolute_moment_terms(sample, max_k))
    if not (math.isfinite(estimate) and estimate > 0):
        raise InvalidParameterError(f"Bernstein constant estimate is {estimate}")
    return estimate


def _param(params, kind, name):
    try:
        value = params[name]
    except KeyError:
        raise InvalidParameterError(f"{kind.value} needs parameter '{name}'")
    return float(value)


def mgf_params_catalog(kind: TailKind, **params) -> MgfParams:
    """(sigma^2, Lambda) with E exp(lambda Y) <= exp(sigma^2 lambda^2 / 2), |lambda| < 1/Lambda.

    bounded(bound=B); hoeffding(lower, upper); normal(variance); exponential(mean).
    """
    if kind == TailKind.BOUNDED:
        bound = _param(params, kind, "bound")
        return MgfParams(bound**2, 0.0)
    if kind == TailKind.HOEFFDING:
        lower = _param(params, kind, "lower")
        upper = _param(params, kind, "upper")
        if upper < lower:
            raise InvalidParameterError("hoeffding needs lower <= upper")
        return MgfParams((upper - lower) ** 2 / 4, 0.0)
    if kind == TailKind.NORMAL:
        return MgfParams(_param(params, kind, "variance"), 0.0)
    if kind == TailKind.EXPONENTIAL:
        mean = _param(params, kind, "mean")
        return MgfParams((2 * mean) ** 2, 2 * mean)
    raise UnsupportedOperationError(f"no MGF entry for {kind}")


def bernstein_catalog(kind: TailKind, **params) -> float:
    """Reference b for Bernstein's moment condition.

    bounded(bound=B) -> B/3; normal(sigma) -> sigma; exponential(rate) -> 1/rate.
    """
    if kind == TailKind.BOUNDED:
        return _param(params, kind, "bound") / 3
    if kind == TailKind.NORMAL:
        return _param(params, kind, "sigma")
    if kind == TailKind.EXPONENTIAL:
        return 1.0 / _param(params, kind, "rate")
    raise UnsupportedOperationError(f"no Bernstein entry for {kind}")


def estimate_p_norm(values, p) -> float:
    """Plug-in (mean |v|^p)^(1/p), computed in log-space."""
    v = np.abs(np.asarray(values, dtype=np.float64).ravel())
    if v.size == 0:
        raise InvalidParameterError("cannot estimate a norm from no values")
    if not p > 0:
        raise InvalidParameterError(f"p must be > 0, got {p}")
    with np.errstate(divide="ignore"):
        log_v = np.log(v)
    return math.exp((float(logsumexp(p * log_v)) - math.log(v.size)) / p)


def empirical_sup_norm(values) -> float:
    """Largest |v| seen; only a hint for ||h||_inf, never a substitute."""
    return float(np.max(np.abs(np.asarray(values, dtype=np.float64))))
