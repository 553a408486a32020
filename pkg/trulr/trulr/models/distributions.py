"""
Parametric input models: exact samplers, log-densities, likelihood ratios
and closed-form means.

All densities are evaluated in log-space. Likelihood ratios are formed as
exp(log f_target - log f_behavior) so extreme mismatches do not overflow
in intermediate products.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg
from scipy.special import betaln, gammaln, hyp1f1, xlog1py, xlogy

from trulr.exceptions import (
    AbsoluteContinuityError,
    InvalidParameterError,
    UnsupportedOperationError,
)
from trulr.models.enums import Family
from trulr.models.streams import RandomStream

LOG_2PI = float(np.log(2 * np.pi))
PROBABILITY_SUM_TOL = 1e-12


class ParametricDistribution:
    """Interface for an input model P_theta.

    Subclasses are immutable, so a single instance can be shared by every
    worker. Randomness always comes from the RandomStream passed in.
    """

    family: Family

    def sample(self, stream: RandomStream, count: int) -> np.ndarray:
        raise NotImplementedError

    def log_density(self, x):
        """Natural log of the density (or mass) at x; -inf outside the support."""
        raise NotImplementedError

    def mean(self):
        raise UnsupportedOperationError(
            f"no closed-form mean for {type(self).__name__}"
        )

    def absolute_moment(self, p):
        """E|X|^p"""
        raise UnsupportedOperationError(
            f"no closed-form absolute moment for {type(self).__name__}"
        )

    @property
    def sup_abs(self):
        """sup |x| over the support (inf for unbounded families)."""
        return np.inf

    @property
    def dimension(self) -> int:
        return 1


def _check_count(count):
    if count < 0:
        raise InvalidParameterError(f"count must be >= 0, got {count}")
    return int(count)


@dataclass(frozen=True)
class Beta(ParametricDistribution):
    a: float
    b: float

    family = Family.BETA

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise InvalidParameterError(f"Beta needs a > 0 and b > 0, got {self}")

    def sample(self, stream, count):
        count = _check_count(count)
        g1 = stream.generator.standard_gamma(self.a, count)
        g2 = stream.generator.standard_gamma(self.b, count)
        return g1 / (g1 + g2)

    def log_density(self, x):
        x = np.asarray(x, dtype=np.float64)
        inside = (x >= 0) & (x <= 1)
        xc = np.clip(x, 0.0, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            value = xlogy(self.a - 1, xc) + xlog1py(self.b - 1, -xc)
        value = np.where(inside, value - betaln(self.a, self.b), -np.inf)
        return value[()] if value.ndim == 0 else value

    def mean(self):
        return self.a / (self.a + self.b)

    def absolute_moment(self, p):
        return float(np.exp(betaln(self.a + p, self.b) - betaln(self.a, self.b)))

    @property
    def sup_abs(self):
        return 1.0


@dataclass(frozen=True)
class Normal(ParametricDistribution):
    mu: float
    sigma: float

    family = Family.NORMAL

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidParameterError(f"Normal needs sigma > 0, got {self}")

    def sample(self, stream, count):
        return stream.generator.normal(self.mu, self.sigma, _check_count(count))

    def log_density(self, x):
        z = (np.asarray(x, dtype=np.float64) - self.mu) / self.sigma
        value = -0.5 * LOG_2PI - np.log(self.sigma) - 0.5 * z * z
        return value[()] if value.ndim == 0 else value

    def mean(self):
        return self.mu

    def absolute_moment(self, p):
        return normal_absolute_moment(self.mu, self.sigma, p)


@dataclass(frozen=True)
class ChiSquared(ParametricDistribution):
    k: float

    family = Family.CHI_SQUARED

    def __post_init__(self):
        if not self.k > 0:
            raise InvalidParameterError(f"ChiSquared needs k > 0, got {self}")

    def sample(self, stream, count):
        return stream.generator.chisquare(self.k, _check_count(count))

    def log_density(self, x):
        x = np.asarray(x, dtype=np.float64)
        half_k = 0.5 * self.k
        xc = np.maximum(x, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            value = (
                xlogy(half_k - 1, xc)
                - 0.5 * xc
                - half_k * np.log(2.0)
                - gammaln(half_k)
            )
        value = np.where(x >= 0, value, -np.inf)
        return value[()] if value.ndim == 0 else value

    def mean(self):
        return self.k

    def absolute_moment(self, p):
        half_k = 0.5 * self.k
        return float(np.exp(p * np.log(2.0) + gammaln(half_k + p) - gammaln(half_k)))


@dataclass(frozen=True, eq=False)
class MvNormal(ParametricDistribution):
    """Multivariate normal. The Cholesky factor is computed once, at construction."""

    mean_vector: np.ndarray
    cov: np.ndarray

    family = Family.MV_NORMAL

    def __post_init__(self):
        mean_vector = np.array(self.mean_vector, dtype=np.float64).reshape(-1)
        cov = np.array(self.cov, dtype=np.float64)
        if cov.shape != (mean_vector.size, mean_vector.size):
            raise InvalidParameterError(
                f"cov shape {cov.shape} does not match mean length {mean_vector.size}"
            )
        if not np.allclose(cov, cov.T, rtol=1e-12, atol=0.0):
            raise InvalidParameterError("cov must be symmetric")
        try:
            chol = linalg.cholesky(cov, lower=True)
        except linalg.LinAlgError as e:
            raise InvalidParameterError(f"cov is not positive definite: {e}") from e
        mean_vector.setflags(write=False)
        cov.setflags(write=False)
        chol.setflags(write=False)
        object.__setattr__(self, "mean_vector", mean_vector)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", chol)
        object.__setattr__(self, "log_det", 2.0 * float(np.sum(np.log(np.diag(chol)))))

    @property
    def dimension(self):
        return self.mean_vector.size

    def sample(self, stream, count):
        z = stream.generator.standard_normal((_check_count(count), self.dimension))
        return self.mean_vector + z @ self.chol.T

    def log_density(self, x):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        rows = np.atleast_2d(x)
        if rows.shape[-1] != self.dimension:
            raise InvalidParameterError(
                f"expected vectors of length {self.dimension}, got {rows.shape[-1]}"
            )
        solved = linalg.solve_triangular(
            self.chol, (rows - self.mean_vector).T, lower=True
        )
        quad = np.sum(solved * solved, axis=0)
        value = -0.5 * (self.dimension * LOG_2PI + self.log_det + quad)
        return float(value[0]) if single else value

    def mean(self):
        return self.mean_vector.copy()


@dataclass(frozen=True, eq=False)
class FiniteDiscrete(ParametricDistribution):
    """Finite distribution over distinct real support points."""

    support: Sequence[float]
    probs: Sequence[float]

    family = Family.FINITE_DISCRETE

    def __post_init__(self):
        support = np.array(self.support, dtype=np.float64).reshape(-1)
        probs = np.array(self.probs, dtype=np.float64).reshape(-1)
        if support.size == 0 or support.size != probs.size:
            raise InvalidParameterError("support and probs must be non-empty and equal length")
        if np.unique(support).size != support.size:
            raise InvalidParameterError("support points must be distinct")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > PROBABILITY_SUM_TOL:
            raise InvalidParameterError(
                f"probs must be >= 0 and sum to 1 (sum={probs.sum()!r})"
            )
        order = np.argsort(support)
        support, probs = support[order], probs[order]
        for array in (support, probs):
            array.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    def sample(self, stream, count):
        return stream.generator.choice(self.support, size=_check_count(count), p=self.probs)

    def log_density(self, x):
        x = np.asarray(x, dtype=np.float64)
        index = np.clip(np.searchsorted(self.support, x), 0, self.support.size - 1)
        hit = self.support[index] == x
        with np.errstate(divide="ignore"):
            value = np.where(hit, np.log(self.probs[index]), -np.inf)
        return value[()] if value.ndim == 0 else value

    def mean(self):
        return float(np.dot(self.support, self.probs))


@dataclass(frozen=True)
class UniformLaplaceMixture(ParametricDistribution):
    """Uniform mass 1-theta on (-a, a) plus Laplace tails of mass theta on |x| >= a.

    Tail density is (theta/2) * exp(a - |x|).
    """

    a: float
    theta: float

    family = Family.UNIFORM_LAPLACE

    def __post_init__(self):
        if not self.a > 0 or not 0 <= self.theta <= 1:
            raise InvalidParameterError(
                f"UniformLaplaceMixture needs a > 0 and theta in [0, 1], got {self}"
            )

    def sample(self, stream, count):
        count = _check_count(count)
        gen = stream.generator
        tail = gen.random(count) < self.theta
        body = gen.uniform(-self.a, self.a, count)
        sign = np.where(gen.random(count) < 0.5, -1.0, 1.0)
        tails = sign * (self.a + gen.standard_exponential(count))
        return np.where(tail, tails, body)

    def log_density(self, x):
        absx = np.abs(np.asarray(x, dtype=np.float64))
        with np.errstate(divide="ignore"):
            body = np.log1p(-self.theta) - np.log(2 * self.a)
            tail = np.log(self.theta / 2) + self.a - absx
        value = np.where(absx < self.a, body, tail)
        return value[()] if value.ndim == 0 else value

    def mean(self):
        return 0.0


def sample(dist: ParametricDistribution, stream: RandomStream, count: int):
    return dist.sample(stream, count)


def log_density(dist: ParametricDistribution, x):
    return dist.log_density(x)


def mean(dist: ParametricDistribution):
    return dist.mean()


def log_likelihood_ratio(target, behavior, x):
    """log l(x) = log f_target(x) - log f_behavior(x), vectorized over x.

    Points outside both supports get -inf (weight 0). Points where only the
    behavior density vanishes violate absolute continuity.
    """
    log_t = np.asarray(target.log_density(x), dtype=np.float64)
    log_b = np.asarray(behavior.log_density(x), dtype=np.float64)
    bad = np.isneginf(log_b) & ~np.isneginf(log_t)
    if np.any(bad):
        raise AbsoluteContinuityError(
            f"behavior {behavior!r} has zero density where target {target!r} does not"
        )
    with np.errstate(invalid="ignore"):
        value = np.where(np.isneginf(log_t), -np.inf, log_t - log_b)
    return value[()] if value.ndim == 0 else value


def likelihood_ratio(target, behavior, x):
    with np.errstate(over="ignore"):
        return np.exp(log_likelihood_ratio(target, behavior, x))


def normal_absolute_moment(mu, sigma, p) -> float:
    """E|Y|^p for Y ~ N(mu, sigma^2).

    sigma^p 2^(p/2) Gamma((p+1)/2) / sqrt(pi) * 1F1(-p/2; 1/2; -mu^2 / (2 sigma^2))
    """
    log_scale = (
        p * np.log(sigma)
        + 0.5 * p * np.log(2.0)
        + gammaln(0.5 * (p + 1))
        - 0.5 * np.log(np.pi)
    )
    return float(np.exp(log_scale) * hyp1f1(-0.5 * p, 0.5, -0.5 * (mu / sigma) ** 2))


FAMILIES = {
    Family.BETA: Beta,
    Family.NORMAL: Normal,
    Family.CHI_SQUARED: ChiSquared,
    Family.MV_NORMAL: MvNormal,
    Family.FINITE_DISCRETE: FiniteDiscrete,
    Family.UNIFORM_LAPLACE: UniformLaplaceMixture,
}


def build_distribution(family: Family, params) -> ParametricDistribution:
    """Distribution from positional ([90, 120]) or named ({"a": 90, "b": 120}) params."""
    cls = FAMILIES[family]
    try:
        if isinstance(params, dict):
            return cls(**params)
        return cls(*params)
    except TypeError as e:
        raise InvalidParameterError(f"bad parameters for {family.value}: {e}") from e
