"""
LR and TruLR point estimators over weighted samples.

Sums are formed with np.sum over contiguous float64 arrays, which numpy
accumulates pairwise.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from trulr.exceptions import InvalidParameterError


@dataclass(frozen=True, eq=False)
class WeightedSample:
    """Outputs h(x_i) paired with likelihood-ratio weights l(x_i).

    Weights that overflowed during exponentiation arrive as +inf; they are
    counted and always truncated by a finite tau.
    """

    h_values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        h = np.ascontiguousarray(self.h_values, dtype=np.float64).ravel()
        w = np.ascontiguousarray(self.weights, dtype=np.float64).ravel()
        if h.size == 0:
            raise InvalidParameterError("weighted sample is empty")
        if h.shape != w.shape:
            raise InvalidParameterError(
                f"h_values and weights differ in length: {h.size} vs {w.size}"
            )
        if not np.all(np.isfinite(h)):
            raise InvalidParameterError("h_values must be finite")
        if np.any(np.isnan(w)) or np.any(w < 0):
            raise InvalidParameterError("weights must be nonnegative numbers")
        object.__setattr__(self, "h_values", h)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.h_values.size

    @property
    def overflow_count(self) -> int:
        return int(np.count_nonzero(np.isposinf(self.weights)))


@dataclass(frozen=True)
class EstimateReport:
    estimate: float
    n: int
    tau: float
    fraction_truncated: float
    max_weight: float
    overflow_count: int = 0
    batch_taus: Optional[Tuple[float, ...]] = field(default=None, repr=False)


def _weighted_mean(h, w):
    with np.errstate(invalid="ignore", over="ignore"):
        return float(np.sum(h * w) / h.size)


def lr_estimate(ws: WeightedSample) -> EstimateReport:
    return EstimateReport(
        estimate=_weighted_mean(ws.h_values, ws.weights),
        n=len(ws),
        tau=math.inf,
        fraction_truncated=0.0,
        max_weight=float(np.max(ws.weights)),
        overflow_count=ws.overflow_count,
    )


def _check_tau(tau):
    if not tau > 0:
        raise InvalidParameterError(f"tau must be > 0, got {tau}")


def trulr_estimate(ws: WeightedSample, tau: float) -> EstimateReport:
    """(1/n) sum h_i * min(l_i, tau)."""
    _check_tau(tau)
    truncated = np.minimum(ws.weights, tau)
    return EstimateReport(
        estimate=_weighted_mean(ws.h_values, truncated),
        n=len(ws),
        tau=float(tau),
        fraction_truncated=int(np.count_nonzero(ws.weights > tau)) / len(ws),
        max_weight=float(np.max(ws.weights)),
        overflow_count=ws.overflow_count,
    )


def estimate(ws: WeightedSample, tau: float = math.inf) -> EstimateReport:
    if tau == math.inf:
        return lr_estimate(ws)
    return trulr_estimate(ws, tau)


def multi_batch_estimate(
    batches: Sequence[WeightedSample], taus: Sequence[float]
) -> EstimateReport:
    """Equal-weight average of per-batch estimators.

    Reported tau is the largest batch boundary; the individual boundaries are
    kept in batch_taus. The truncation fraction is over all records.
    """
    if len(batches) == 0:
        raise InvalidParameterError("batch list is empty")
    if len(batches) != len(taus):
        raise InvalidParameterError(
            f"got {len(batches)} batches but {len(taus)} boundaries"
        )

    reports: List[EstimateReport] = [estimate(ws, tau) for ws, tau in zip(batches, taus)]
    total = sum(r.n for r in reports)
    truncated = sum(round(r.fraction_truncated * r.n) for r in reports)
    return EstimateReport(
        estimate=float(np.sum([r.estimate for r in reports]) / len(reports)),
        n=total,
        tau=float(max(taus)),
        fraction_truncated=truncated / total,
        max_weight=max(r.max_weight for r in reports),
        overflow_count=sum(r.overflow_count for r in reports),
        batch_taus=tuple(float(t) for t in taus),
    )
