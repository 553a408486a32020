"""
Executable anti-concentration constructions for the plain LR estimator,
plus empirical tail and coverage checks.

Both constructions fix theta0 = (delta/n)(1 - e*delta/n)^-(n-1) for the
behavior measure and solve a self-consistency equation for the target
weight theta by bisection. The estimator then exceeds eps with probability
at least delta, although the alpha-divergence stays finite.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize
from scipy.special import gammaincc, gammaln

from trulr.boundaries import BoundarySpec, ProblemConstants, truncation_boundary
from trulr.bounds import evaluate_bound
from trulr.divergence import alpha_divergence_closed
from trulr.exceptions import ConstructionInfeasibleError, InvalidParameterError
from trulr.harness.engine import chunk_sizes, run_tasks
from trulr.models.distributions import (
    FiniteDiscrete,
    ParametricDistribution,
    UniformLaplaceMixture,
    likelihood_ratio,
)
from trulr.models.enums import INF_NORM_RULES, BoundId, BoundaryRule
from trulr.models.outputs import TailIdentity, identity
from trulr.models.streams import RandomStream

logger = logging.getLogger(__name__)

BISECTION_TOL = 1e-12
BISECTION_MAXITER = 200
TAIL_SLACK = 1e-9
MIN_TAIL_REPS = 1_000
REPS_PER_CHUNK = 2_000


def behavior_theta(n, delta):
    if not 0 < delta < math.exp(-1):
        raise InvalidParameterError(f"delta must be in (0, 1/e), got {delta}")
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    return (delta / n) * (1 - math.e * delta / n) ** (-(n - 1))


def _bisect(fn, lo, hi, what):
    f_lo, f_hi = fn(lo), fn(hi)
    if np.sign(f_lo) == np.sign(f_hi):
        raise ConstructionInfeasibleError(
            f"construction infeasible for these inputs: no sign change for {what} "
            f"on [{lo:.6g}, {hi:.6g}]"
        )
    return optimize.bisect(
        fn,
        lo,
        hi,
        xtol=BISECTION_TOL * hi,
        rtol=4 * np.finfo(float).eps,
        maxiter=BISECTION_MAXITER,
    )


def two_point_xi(theta, theta0, alpha):
    """I_alpha(theta, theta0) - 1 for the 3-point measure, free of cancellation."""
    head = theta**alpha * theta0 ** (1 - alpha)
    tail = math.expm1(alpha * math.log1p(-theta) + (1 - alpha) * math.log1p(-theta0))
    return head + tail


@dataclass(frozen=True)
class DiscreteCounterexample:
    """h(x) = x on {-a, 0, a} with symmetric mass theta (target) vs theta0."""

    a: float
    alpha: float
    n: int
    delta: float
    theta0: float
    theta: float
    xi: float
    eps_star: float

    @property
    def behavior(self):
        return FiniteDiscrete(
            [-self.a, 0.0, self.a],
            [self.theta0 / 2, 1 - self.theta0, self.theta0 / 2],
        )

    @property
    def target(self):
        return FiniteDiscrete(
            [-self.a, 0.0, self.a],
            [self.theta / 2, 1 - self.theta, self.theta / 2],
        )

    @property
    def h(self):
        return identity

    @property
    def eps(self):
        return self.eps_star

    @property
    def eps_star_closed(self):
        """a (xi / (delta n^(alpha-1)))^(1/alpha) (1 - e delta/n)^((n-1)/alpha)"""
        a, n, d = self.alpha, self.n, self.delta
        return (
            self.a
            * (self.xi / (d * n ** (a - 1))) ** (1 / a)
            * (1 - math.e * d / n) ** ((n - 1) / a)
        )

    @property
    def divergence(self):
        return alpha_divergence_closed(self.target, self.behavior, self.alpha).value


def build_discrete_counterexample(a, alpha, n, delta) -> DiscreteCounterexample:
    if not a > 0:
        raise InvalidParameterError(f"a must be > 0, got {a}")
    if not 1 < alpha <= 2:
        raise InvalidParameterError(f"alpha must be in (1, 2], got {alpha}")
    theta0 = behavior_theta(n, delta)

    def residual(theta):
        xi = max(two_point_xi(theta, theta0, alpha), 0.0)
        return theta - theta0 ** ((alpha - 1) / alpha) * xi ** (1 / alpha)

    # The positive root sits below theta0, where residual changes sign.
    theta = _bisect(residual, 0.0, theta0, "the discrete self-consistency")
    xi = two_point_xi(theta, theta0, alpha)
    if n < math.e * delta * xi ** (1 / (alpha - 1)):
        raise ConstructionInfeasibleError(
            f"construction infeasible for these inputs: n={n} < e*delta*xi^(1/(alpha-1))"
        )
    result = DiscreteCounterexample(
        a=a,
        alpha=alpha,
        n=n,
        delta=delta,
        theta0=theta0,
        theta=theta,
        xi=xi,
        eps_star=a * theta / (n * theta0),
    )
    logger.debug("discrete counterexample: %s", result)
    return result


@dataclass(frozen=True)
class ContinuousCounterexample:
    """Uniform on (-a, a) with Laplace tails of weight theta vs theta0; h(x) = x 1{|x|>=a}."""

    a: float
    alpha: float
    p: float
    n: int
    delta: float
    theta0: float
    theta: float
    eps: float

    @property
    def behavior(self):
        return UniformLaplaceMixture(self.a, self.theta0)

    @property
    def target(self):
        return UniformLaplaceMixture(self.a, self.theta)

    @property
    def h(self):
        return TailIdentity(self.a)

    @property
    def divergence(self):
        return alpha_divergence_closed(self.target, self.behavior, self.alpha).value

    @property
    def h_p_norm(self):
        """||h||_p under the behavior: (theta0 e^a Gamma(p+1, a))^(1/p)."""
        return math.exp(self._log_h_p_moment / self.p)

    @property
    def norm_coupling_gap(self):
        """Relative gap |a^p - ||h||_p^p| / a^p; zero when a = ||h||_p."""
        log_ap = self.p * math.log(self.a)
        return abs(math.expm1(self._log_h_p_moment - log_ap))

    @property
    def _log_h_p_moment(self):
        p = self.p
        return (
            math.log(self.theta0)
            + self.a
            + math.log(gammaincc(p + 1, self.a))
            + gammaln(p + 1)
        )


def build_continuous_counterexample(a, alpha, p, n, delta) -> ContinuousCounterexample:
    if not a > 0:
        raise InvalidParameterError(f"a must be > 0, got {a}")
    if not p > 2:
        raise InvalidParameterError(f"p must be > 2, got {p}")
    if alpha < 2 * p / (p - 2):
        raise InvalidParameterError(
            f"alpha must be >= 2p/(p-2) = {2 * p / (p - 2):.6g}, got {alpha}"
        )
    theta0 = behavior_theta(n, delta)

    def residual(theta):
        div = alpha_divergence_closed(
            UniformLaplaceMixture(a, theta), UniformLaplaceMixture(a, theta0), alpha
        )
        xi = max(math.expm1((2 / alpha) * div.log_value), 0.0)
        return theta - math.sqrt(theta0 * xi)

    theta = _bisect(residual, theta0, 1.0, "the continuous self-consistency")
    result = ContinuousCounterexample(
        a=a,
        alpha=alpha,
        p=p,
        n=n,
        delta=delta,
        theta0=theta0,
        theta=theta,
        eps=a * theta / (n * theta0),
    )
    logger.debug("continuous counterexample: %s", result)
    return result


@dataclass(frozen=True)
class TailFrequency:
    frequency: float
    binomial_se: float
    reps: int


@dataclass(frozen=True)
class _EstimateChunk:
    """Estimates for `reps` independent datasets of size n."""

    target: ParametricDistribution
    behavior: ParametricDistribution
    h: Callable
    n: int
    reps: int
    tau: float = math.inf

    def __call__(self, stream):
        x = self.behavior.sample(stream, self.reps * self.n)
        h_values = self.h(x).reshape(self.reps, self.n)
        weights = likelihood_ratio(self.target, self.behavior, x).reshape(
            self.reps, self.n
        )
        with np.errstate(invalid="ignore"):
            return np.sum(h_values * np.minimum(weights, self.tau), axis=1) / self.n


def simulate_estimates(
    target, behavior, h, n, reps, stream: RandomStream, tau=math.inf, threads=1
) -> np.ndarray:
    """reps independent estimates; chunk j draws from stream.spawn(j)."""
    sizes = chunk_sizes(reps, REPS_PER_CHUNK)
    tasks = [_EstimateChunk(target, behavior, h, n, size, tau) for size in sizes]
    streams = [stream.spawn(j) for j in range(len(sizes))]
    return np.concatenate(run_tasks(tasks, streams, threads))


def empirical_tail_probability(
    construction, reps: int, stream: RandomStream, tau=math.inf, threads=1
) -> TailFrequency:
    """Frequency of |LR estimate| >= eps over independent datasets."""
    if reps < MIN_TAIL_REPS:
        raise InvalidParameterError(f"reps must be >= {MIN_TAIL_REPS}, got {reps}")
    estimates = simulate_estimates(
        construction.target,
        construction.behavior,
        construction.h,
        construction.n,
        reps,
        stream,
        tau,
        threads,
    )
    hits = np.count_nonzero(np.abs(estimates) >= construction.eps * (1 - TAIL_SLACK))
    frequency = hits / reps
    return TailFrequency(
        frequency=frequency,
        binomial_se=math.sqrt(frequency * (1 - frequency) / reps),
        reps=reps,
    )


def coverage_bound_id(spec: BoundarySpec, constants: ProblemConstants) -> BoundId:
    if spec.is_lr:
        return (
            BoundId.LR_CONC_INF if constants.h_inf_norm is not None else BoundId.LR_CONC_P
        )
    if spec.rule in INF_NORM_RULES:
        return BoundId.TRULR_CONC_INF_FULL
    if spec.rule == BoundaryRule.PNORM_BERNSTEIN:
        return BoundId.TRULR_CONC_BERNSTEIN_FULL
    if spec.rule == BoundaryRule.FIXED and constants.h_inf_norm is not None:
        return BoundId.TRULR_CONC_INF_FULL
    return BoundId.TRULR_CONC_MGF_FULL


@dataclass(frozen=True)
class CoverageResult:
    empirical_coverage: float
    bound: float
    tau: float
    reps: int
    bound_id: BoundId
    errors: Optional[np.ndarray] = field(default=None, repr=False, compare=False)


def coverage_check(
    target,
    behavior,
    h,
    boundary_spec: BoundarySpec,
    constants: ProblemConstants,
    reps: int,
    stream: RandomStream,
    truth: Optional[float] = None,
    threads=1,
) -> CoverageResult:
    """Fraction of replications whose error stays within the matching bound."""
    if truth is None:
        truth = target.mean()
    p = boundary_spec.p if boundary_spec.p is not None else constants.p
    if p is not None and constants.p is None:
        constants = dataclasses.replace(constants, p=p)
    tau = truncation_boundary(boundary_spec, constants)
    bound_id = coverage_bound_id(boundary_spec, constants)
    bound = evaluate_bound(bound_id, constants, tau=tau, b=boundary_spec.b)

    estimates = simulate_estimates(
        target, behavior, h, constants.n, reps, stream, tau, threads
    )
    errors = np.abs(estimates - truth)
    coverage = np.count_nonzero(errors <= bound) / reps
    logger.info(
        "coverage %.4f of bound %s=%.6g (tau=%.6g)", coverage, bound_id.value, bound, tau
    )
    return CoverageResult(coverage, bound, tau, reps, bound_id, errors)
