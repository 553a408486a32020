"""
Replicated portfolio pricing: every replication simulates a fresh four-week
history, prices it under each rule and is scored against reference prices.
"""

import logging
import math
import os
import time
from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from trulr.estimators import EstimateReport
from trulr.harness.accumulators import MseAccumulator, SweepResult
from trulr.harness.engine import run_streams
from trulr.harness.persistence import MSE_COLUMNS, write_csv, write_manifest
from trulr.models.streams import RandomStream
from trulr.portfolio.config import PortfolioConfig
from trulr.portfolio.pricing import (
    RULE_LABELS,
    PricingRule,
    ReferencePrice,
    generate_history,
    price_portfolio,
    reference_price,
    week_p,
)
from trulr.utils import format_secs

logger = logging.getLogger(__name__)

REFERENCE_STREAM_ID = 2**63 + 2
DEFAULT_RULES = (PricingRule.LR, PricingRule.TRULR_M, PricingRule.TRULR_S)
TOTAL_ID = "portfolio_total"


def option_id(index):
    return f"portfolio_option{index + 1}"


@dataclass(frozen=True)
class PortfolioTask:
    """One replication: history of n paths per (week, option), priced under every rule.

    Returns an (options + 1, rules, 3) array of (estimate, tau, fraction_truncated);
    the last option row is the portfolio total.
    """

    config: PortfolioConfig
    n: int
    rules: Tuple[PricingRule, ...]

    def __call__(self, stream):
        history = generate_history(self.config, self.n, stream)
        options = len(self.config.options)
        out = np.empty((options + 1, len(self.rules), 3))
        for r, rule in enumerate(self.rules):
            price = price_portfolio(self.config, history, rule, self.config.delta)
            for i, report in enumerate(price.per_option):
                out[i, r] = (report.estimate, report.tau, report.fraction_truncated)
            fractions = [report.fraction_truncated for report in price.per_option]
            out[options, r] = (price.total, math.nan, np.mean(fractions))
        return out


def resolve_reference(config: PortfolioConfig) -> ReferencePrice:
    if config.reference_prices is not None:
        return ReferencePrice(
            tuple(config.reference_prices),
            tuple(math.nan for _ in config.reference_prices),
            0,
        )
    logger.info("simulating reference prices with %d paths per option", config.reference_paths)
    return reference_price(
        config, config.reference_paths, RandomStream(config.seed, REFERENCE_STREAM_ID)
    )


def _summarize(results, truth, scenario_id, label, n, seed) -> SweepResult:
    accumulator = MseAccumulator(truth)
    accumulator.before_all()
    for i, (value, tau, fraction) in enumerate(results):
        accumulator.step(
            i,
            EstimateReport(
                estimate=float(value),
                n=n,
                tau=float(tau),
                fraction_truncated=float(fraction),
                max_weight=math.nan,
            ),
        )
    accumulator.after_all()
    return accumulator.summary(scenario_id, label, n, seed)


def portfolio_sweep_core(
    config: PortfolioConfig,
    reference: ReferencePrice,
    rules: Sequence[PricingRule] = DEFAULT_RULES,
    threads: Optional[int] = 1,
) -> Iterator[List[SweepResult]]:
    """Yields the rows of one n at a time; replication i at grid point g uses
    RandomStream(seed, i).spawn(g)."""
    truths = list(reference.prices) + [reference.total]
    ids = [option_id(i) for i in range(len(config.options))] + [TOTAL_ID]
    for g, n in enumerate(config.n_grid):
        start = time.time()
        task = PortfolioTask(config, n, tuple(rules))
        streams = [RandomStream(config.seed, i).spawn(g) for i in range(config.reps)]
        results = np.stack(run_streams(task, streams, threads))
        rows = [
            _summarize(
                results[:, k, r], truths[k], ids[k], RULE_LABELS[rule], n, config.seed
            )
            for k in range(len(ids))
            for r, rule in enumerate(rules)
        ]
        logger.info("portfolio n=%d done in %s", n, format_secs(time.time() - start))
        yield rows


def run_portfolio(
    config: PortfolioConfig,
    threads: Optional[int] = 1,
    rules: Sequence[PricingRule] = DEFAULT_RULES,
    on_grid_point: Optional[Callable[[List[SweepResult]], None]] = None,
) -> List[SweepResult]:
    """Writes <out_dir>/mse_sweep.csv and manifest.json (with the reference prices)."""
    logger.info("portfolio run with seed %d", config.seed)
    reference = resolve_reference(config)
    rows = []
    for grid_rows in portfolio_sweep_core(config, reference, rules, threads):
        rows.extend(grid_rows)
        if on_grid_point is not None:
            on_grid_point(grid_rows)
    write_csv(rows, os.path.join(config.out_dir, "mse_sweep.csv"), MSE_COLUMNS)
    write_manifest(
        config.out_dir,
        config,
        {
            "reference_prices": reference.prices,
            "reference_std_errors": reference.std_errors,
            "reference_paths": reference.paths,
            "week_p": [[week_p(a) for a in option.alphas] for option in config.options],
        },
    )
    return rows
