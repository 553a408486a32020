import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from trulr.estimators import EstimateReport
from trulr.exceptions import InvalidParameterError


class ReplicationAccumulator:
    """Interface to hook into the lifecycle of a batch of replications.

    Useful to compute aggregate statistics of one estimator at one grid point.
    """

    def before_all(self):
        """Called before the first replication."""
        pass

    def step(self, rep_index: int, report: EstimateReport):
        """Called with the estimate of each replication, in index order."""
        pass

    def after_all(self):
        """Called after the last replication."""
        pass


@dataclass(frozen=True)
class SweepResult:
    """One row of mse_sweep.csv"""

    scenario_id: str
    estimator: str
    n: int
    reps: int
    mse: float
    mse_stderr: float  # nan when reps == 1
    bias: float
    variance: float
    mean_tau: float
    frac_truncated: float
    seed: int


@dataclass(frozen=True)
class QuantileResult:
    """One row of quantile_sweep.csv"""

    scenario_id: str
    estimator: str
    delta: float
    quantile_abs_error: float
    reps: int
    seed: int


class ErrorAccumulator(ReplicationAccumulator):
    """Keeps est - truth per replication along with truncation diagnostics."""

    def __init__(self, truth):
        self.truth = truth

    def before_all(self):
        self.errors: List[float] = []
        self.taus: List[float] = []
        self.fractions: List[float] = []

    def step(self, rep_index, report):
        self.errors.append(report.estimate - self.truth)
        self.taus.append(report.tau)
        self.fractions.append(report.fraction_truncated)

    def after_all(self):
        self.errors = np.asarray(self.errors, dtype=np.float64)
        self.taus = np.asarray(self.taus, dtype=np.float64)
        self.fractions = np.asarray(self.fractions, dtype=np.float64)

    @property
    def reps(self):
        return len(self.errors)


class MseAccumulator(ErrorAccumulator):
    def summary(self, scenario_id, estimator, n, seed) -> SweepResult:
        errors = self.errors
        squared = errors * errors
        bias = float(np.mean(errors))
        mse_stderr = (
            float(np.std(squared, ddof=1) / math.sqrt(self.reps))
            if self.reps > 1
            else math.nan
        )
        return SweepResult(
            scenario_id=scenario_id,
            estimator=estimator,
            n=n,
            reps=self.reps,
            mse=float(np.mean(squared)),
            mse_stderr=mse_stderr,
            bias=bias,
            variance=float(np.var(errors)),
            mean_tau=float(np.mean(self.taus)),
            frac_truncated=float(np.mean(self.fractions)),
            seed=seed,
        )


def order_statistic_quantile(abs_errors, delta) -> float:
    """Sorted |errors| at 1-based index ceil((1 - delta) * reps); no interpolation."""
    reps = len(abs_errors)
    index = math.ceil((1 - delta) * reps - 1e-9)
    index = min(max(index, 1), reps)
    return float(np.partition(np.asarray(abs_errors), index - 1)[index - 1])


class QuantileAccumulator(ErrorAccumulator):
    def summary(self, scenario_id, estimator, delta, seed) -> QuantileResult:
        return QuantileResult(
            scenario_id=scenario_id,
            estimator=estimator,
            delta=delta,
            quantile_abs_error=order_statistic_quantile(np.abs(self.errors), delta),
            reps=self.reps,
            seed=seed,
        )


def min_quantile_reps(delta_grid) -> int:
    return math.ceil(10 / min(delta_grid) - 1e-9)


def check_quantile_reps(reps, delta_grid: Optional[List[float]]):
    if not delta_grid:
        raise InvalidParameterError("quantile sweep needs a non-empty delta_grid")
    needed = min_quantile_reps(delta_grid)
    if reps < needed:
        raise InvalidParameterError(
            f"reps={reps} too small for delta={min(delta_grid)}: need >= {needed}"
        )
