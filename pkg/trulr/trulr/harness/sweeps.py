"""
MSE sweeps over n and (1 - delta)-quantile sweeps over delta.

Every replication draws one dataset and evaluates all estimators on it.
Replication i at grid point g draws from RandomStream(seed, i).spawn(g), so
results do not depend on the number of workers.
"""

import dataclasses
import logging
import math
import os
import time
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from trulr.boundaries import (
    DEFAULT_MAX_K,
    DEFAULT_MULTIPLIER,
    bernstein_constant_estimate,
    truncation_boundary,
)
from trulr.estimators import EstimateReport, estimate
from trulr.exceptions import ConfigError
from trulr.harness.accumulators import (
    MseAccumulator,
    QuantileAccumulator,
    QuantileResult,
    SweepResult,
    check_quantile_reps,
)
from trulr.harness.config import ExperimentConfig
from trulr.harness.engine import run_streams
from trulr.harness.persistence import (
    MSE_COLUMNS,
    QUANTILE_COLUMNS,
    write_csv,
    write_manifest,
)
from trulr.harness.registry import LabeledEstimator
from trulr.harness.scenarios import Scenario, SyntheticScenario
from trulr.models.streams import RandomStream
from trulr.utils import format_secs

logger = logging.getLogger(__name__)

PILOT_STREAM_ID = 2**63


def resolve_estimators(
    scenario: Scenario,
    estimators: Sequence[LabeledEstimator],
    seed: int,
    pilot_size: int,
) -> List[LabeledEstimator]:
    """Fill in pilot-estimated Bernstein constants (TruLR-E)."""
    resolved = []
    b_hat = None
    for estimator in estimators:
        if estimator.spec.estimate_b:
            if b_hat is None:
                pilot = scenario.pilot_values(
                    RandomStream(seed, PILOT_STREAM_ID), pilot_size
                )
                b_hat = bernstein_constant_estimate(
                    pilot, DEFAULT_MAX_K, DEFAULT_MULTIPLIER
                )
                logger.info("pilot Bernstein constant b=%.6g (%d draws)", b_hat, pilot_size)
            estimator = dataclasses.replace(estimator, spec=estimator.spec.with_b(b_hat))
        resolved.append(estimator)
    return resolved


def boundary_table(scenario, estimators, n, deltas) -> np.ndarray:
    """taus[e, d] for estimator e at confidence level deltas[d]."""
    taus = np.empty((len(estimators), len(deltas)))
    for d, delta in enumerate(deltas):
        constants = scenario.constants(n, delta)
        for e, estimator in enumerate(estimators):
            taus[e, d] = truncation_boundary(estimator.spec, constants)
    return taus


@dataclass(frozen=True)
class ReplicationTask:
    """One dataset of size n, estimated under every boundary in taus."""

    scenario: Scenario
    n: int
    taus: Tuple[Tuple[float, ...], ...]

    def __call__(self, stream):
        ws = self.scenario.draw(stream, self.n)
        out = np.empty((len(self.taus), len(self.taus[0]), 2))
        for e, row in enumerate(self.taus):
            for d, tau in enumerate(row):
                report = estimate(ws, tau)
                out[e, d] = (report.estimate, report.fraction_truncated)
        return out


def run_grid_point(scenario, n, taus, reps, seed, grid_index, threads) -> np.ndarray:
    """(reps, estimators, deltas, 2) array of (estimate, fraction_truncated)."""
    task = ReplicationTask(scenario, n, tuple(map(tuple, taus)))
    streams = [RandomStream(seed, i).spawn(grid_index) for i in range(reps)]
    return np.stack(run_streams(task, streams, threads))


def _feed(accumulator, results, n, tau):
    accumulator.before_all()
    for i, (value, fraction) in enumerate(results):
        accumulator.step(
            i,
            EstimateReport(
                estimate=float(value),
                n=n,
                tau=tau,
                fraction_truncated=float(fraction),
                max_weight=math.nan,
            ),
        )
    accumulator.after_all()
    return accumulator


def mse_sweep_core(
    scenario: Scenario,
    estimators: Sequence[LabeledEstimator],
    n_grid: Sequence[int],
    delta: float,
    reps: int,
    seed: int,
    threads: Optional[int] = 1,
) -> Iterator[List[SweepResult]]:
    """Yields the rows of one n at a time, in n_grid order."""
    for g, n in enumerate(n_grid):
        start = time.time()
        taus = boundary_table(scenario, estimators, n, [delta])
        results = run_grid_point(scenario, n, taus, reps, seed, g, threads)
        rows = []
        for e, estimator in enumerate(estimators):
            accumulator = _feed(
                MseAccumulator(scenario.truth), results[:, e, 0], n, float(taus[e, 0])
            )
            rows.append(
                accumulator.summary(scenario.scenario_id, estimator.label, n, seed)
            )
        logger.info("n=%d done in %s", n, format_secs(time.time() - start))
        yield rows


def quantile_sweep_core(
    scenario: Scenario,
    estimators: Sequence[LabeledEstimator],
    n: int,
    delta_grid: Sequence[float],
    reps: int,
    seed: int,
    threads: Optional[int] = 1,
) -> List[QuantileResult]:
    check_quantile_reps(reps, delta_grid)
    taus = boundary_table(scenario, estimators, n, delta_grid)
    results = run_grid_point(scenario, n, taus, reps, seed, 0, threads)
    rows = []
    for e, estimator in enumerate(estimators):
        for d, delta in enumerate(delta_grid):
            accumulator = _feed(
                QuantileAccumulator(scenario.truth),
                results[:, e, d],
                n,
                float(taus[e, d]),
            )
            rows.append(
                accumulator.summary(scenario.scenario_id, estimator.label, delta, seed)
            )
    return rows


def _prepare(config: ExperimentConfig, scenario: Optional[Scenario]):
    scenario = scenario or SyntheticScenario.from_config(config)
    estimators = resolve_estimators(
        scenario, config.estimators, config.seed, config.pilot_size
    )
    return scenario, estimators


def run_mse_sweep(
    config: ExperimentConfig,
    threads: Optional[int] = 1,
    scenario: Optional[Scenario] = None,
    on_grid_point: Optional[Callable[[List[SweepResult]], None]] = None,
) -> List[SweepResult]:
    """Runs the sweep and writes <out_dir>/mse_sweep.csv and manifest.json."""
    scenario, estimators = _prepare(config, scenario)
    logger.info("mse sweep %s with seed %d", config.scenario_id, config.seed)
    rows = []
    for grid_rows in mse_sweep_core(
        scenario,
        estimators,
        config.n_grid,
        config.delta,
        config.reps,
        config.seed,
        threads,
    ):
        rows.extend(grid_rows)
        if on_grid_point is not None:
            on_grid_point(grid_rows)

    write_csv(rows, os.path.join(config.out_dir, "mse_sweep.csv"), MSE_COLUMNS)
    write_manifest(config.out_dir, config, _manifest_extra(scenario, estimators))
    return rows


def run_quantile_sweep(
    config: ExperimentConfig,
    threads: Optional[int] = 1,
    scenario: Optional[Scenario] = None,
) -> List[QuantileResult]:
    """Runs at the single n of n_grid and writes <out_dir>/quantile_sweep.csv."""
    if not config.delta_grid:
        raise ConfigError("quantile sweep needs delta_grid")
    if len(config.n_grid) != 1:
        raise ConfigError(
            f"quantile sweep runs at a single n, got n_grid={list(config.n_grid)}"
        )
    check_quantile_reps(config.reps, config.delta_grid)
    scenario, estimators = _prepare(config, scenario)
    logger.info("quantile sweep %s with seed %d", config.scenario_id, config.seed)
    rows = quantile_sweep_core(
        scenario,
        estimators,
        config.n_grid[0],
        config.delta_grid,
        config.reps,
        config.seed,
        threads,
    )
    write_csv(
        rows, os.path.join(config.out_dir, "quantile_sweep.csv"), QUANTILE_COLUMNS
    )
    write_manifest(config.out_dir, config, _manifest_extra(scenario, estimators))
    return rows


def _manifest_extra(scenario, estimators):
    extra = {
        "truth": scenario.truth,
        "estimators": {e.label: e.spec for e in estimators},
    }
    for key in ("divergence", "h_inf_norm", "h_p_norm"):
        if hasattr(scenario, key):
            extra[key] = getattr(scenario, key)
    return extra
