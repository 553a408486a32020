"""
Closed-form concentration, bias and variance bounds for LR and TruLR.
"""

import math
from typing import Optional

from trulr.boundaries import MgfParams, ProblemConstants
from trulr.exceptions import InvalidParameterError, MissingConstantsError
from trulr.models.enums import BoundId

TAU_BOUNDS = {
    BoundId.TRULR_BIAS_INF,
    BoundId.TRULR_VAR_INF,
    BoundId.TRULR_BIAS_P,
    BoundId.TRULR_VAR_P,
    BoundId.TRULR_CONC_INF_FULL,
    BoundId.TRULR_CONC_MGF_FULL,
    BoundId.TRULR_CONC_BERNSTEIN_FULL,
}
INF_NORM_BOUNDS = {
    BoundId.LR_CONC_INF,
    BoundId.TRULR_BIAS_INF,
    BoundId.TRULR_VAR_INF,
    BoundId.TRULR_CONC_INF_FULL,
}


def _bias_p(c, tau):
    a, p = c.alpha, c.p
    return c.h_p_norm * tau ** (1 - a + a / p) * c.divergence ** (1 - 1 / p)


def _var_p(c, tau):
    a, p = c.alpha, c.p
    return (
        c.h_p_norm**2 * tau ** (2 - a + 2 * a / p) * c.divergence ** (1 - 2 / p) / c.n
    )


def variance_mgf_params(constants: ProblemConstants, tau) -> MgfParams:
    """(sigma^2, Lambda) for the truncated summand when only ||h||_p is known.

    sigma^2 is the per-sample second moment bound from Holder with ||h||_p; with
    Lambda = 0 the MGF bound at tau* reproduces the pnorm_mgf_optimal constant.
    """
    constants.require("variance MGF parameters", "h_p_norm", "p")
    return MgfParams(_var_p(constants, tau) * constants.n, 0.0)


def evaluate_bound(
    bound_id: BoundId,
    constants: ProblemConstants,
    tau: Optional[float] = None,
    mgf: Optional[MgfParams] = None,
    b: Optional[float] = None,
) -> float:
    """Value of one bound.

    The bernstein full bound takes the raw Bernstein constant b of h
    (before scaling by I_alpha^(1/p)/||h||_p).
    """
    c = constants
    if bound_id in INF_NORM_BOUNDS:
        c.require(bound_id.value, "h_inf_norm")
    elif bound_id in (BoundId.LR_CONC_P, BoundId.LR_VAR_P):
        c.require(bound_id.value, "h_p_norm")
    else:
        c.require(bound_id.value, "h_p_norm", "p")
    if bound_id in TAU_BOUNDS:
        if tau is None:
            raise MissingConstantsError(bound_id.value, ["tau"])
        if not tau > 0:
            raise InvalidParameterError(f"tau must be > 0, got {tau}")

    a, n, div, log_term = c.alpha, c.n, c.divergence, c.log_term

    if bound_id == BoundId.LR_CONC_INF:
        return c.h_inf_norm * (4 * div / (c.delta * n ** (a - 1))) ** (1 / a)
    if bound_id == BoundId.LR_CONC_P:
        return 2 / math.sqrt(n * c.delta) * c.h_p_norm * div ** (1 / a)
    if bound_id == BoundId.LR_VAR_P:
        return c.h_p_norm**2 * div ** (2 / a) / n
    if bound_id == BoundId.TRULR_BIAS_INF:
        return c.h_inf_norm * tau ** (1 - a) * div
    if bound_id == BoundId.TRULR_VAR_INF:
        return c.h_inf_norm**2 * tau ** (2 - a) * div / n
    if bound_id == BoundId.TRULR_BIAS_P:
        return _bias_p(c, tau)
    if bound_id == BoundId.TRULR_VAR_P:
        return _var_p(c, tau)
    if bound_id == BoundId.TRULR_CONC_INF_FULL:
        h = c.h_inf_norm
        return (
            math.sqrt(2 * tau ** (2 - a) * log_term * div / n) * h
            + h * tau * log_term / (3 * n)
            + h * tau ** (1 - a) * div
        )
    if bound_id == BoundId.TRULR_CONC_MGF_FULL:
        if mgf is None:
            mgf = variance_mgf_params(c, tau)
        deviation = max(
            math.sqrt(2 * mgf.sigma_sq * log_term / n),
            2 * mgf.lambda_cap * log_term / n,
        )
        return deviation + _bias_p(c, tau)
    if bound_id == BoundId.TRULR_CONC_BERNSTEIN_FULL:
        if b is None:
            raise MissingConstantsError(bound_id.value, ["b"])
        return (
            math.sqrt(2 * _var_p(c, tau) * log_term)
            + b * tau ** (1 + a / c.p) * log_term / n
            + _bias_p(c, tau)
        )
    raise InvalidParameterError(f"unknown bound {bound_id}")


def leading_order(constants: ProblemConstants, norm: float, exponent: float) -> float:
    """norm * (ln(2/delta)/n)^exponent * I_alpha^(1/alpha)"""
    c = constants
    return norm * (c.log_term / c.n) ** exponent * c.divergence ** (1 / c.alpha)
