import logging
import math
from contextlib import contextmanager

from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import BarColumn, Progress, TimeRemainingColumn
from rich.table import Table
from rich.text import Text
from rich.theme import Theme

custom_theme = Theme(
    {
        "progress.remaining": "",
        "progress.percentage": "",
        "bar.complete": "green",
        "bar.finished": "green",
    }
)
console = Console(theme=custom_theme)
err_console = Console(stderr=True)


class CustomTimeRemainingColumn(TimeRemainingColumn):
    """Renders estimated time remaining according to show_time field."""

    def render(self, task):
        show = task.fields.get("show_time", True)
        if not show:
            return Text("")
        return super().render(task)


def setup_logging(verbose=False, quiet=False):
    level = logging.INFO
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=verbose)],
        force=True,
    )


@contextmanager
def grid_progress(description, total, quiet=False):
    """Yields a callback to be called once per finished grid point."""
    if quiet:
        yield lambda rows: None
        return
    with Progress(
        "[progress.description]{task.description}",
        BarColumn(),
        "[progress.percentage]{task.percentage:>3.0f}%",
        CustomTimeRemainingColumn(),
        console=console,
    ) as progress:
        task = progress.add_task(description, total=total)
        yield lambda rows: progress.update(task, advance=1)
        progress.refresh()


def fmt(value, spec=".4g"):
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return ""
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return format(value, spec)


def _lr_mse(rows, row):
    for other in rows:
        if (
            other.estimator == "LR"
            and other.n == row.n
            and other.scenario_id == row.scenario_id
        ):
            return other.mse
    return None


def sweep_table(rows, title="MSE Sweep"):
    table = Table(title=title, box=box.MINIMAL)
    table.add_column("SCENARIO", no_wrap=True)
    table.add_column("ESTIMATOR", style="cyan", no_wrap=True)
    table.add_column("N", justify="right")
    table.add_column("MSE", justify="right")
    table.add_column("± S.E.", justify="right")
    table.add_column("BIAS", justify="right")
    table.add_column("MEAN TAU", justify="right")
    table.add_column("TRUNC %", justify="right")
    table.add_column("LR / EST", justify="right")
    for row in rows:
        lr_mse = _lr_mse(rows, row)
        ratio = lr_mse / row.mse if lr_mse is not None and row.mse > 0 else None
        table.add_row(
            row.scenario_id,
            row.estimator,
            str(row.n),
            fmt(row.mse),
            fmt(row.mse_stderr, ".2g"),
            fmt(row.bias),
            fmt(row.mean_tau),
            fmt(100 * row.frac_truncated, ".2f"),
            fmt(ratio, ".2f"),
        )
    return table


def quantile_table(rows):
    table = Table(title="(1 - delta)-Quantiles of |error|", box=box.MINIMAL)
    table.add_column("ESTIMATOR", style="cyan", no_wrap=True)
    table.add_column("DELTA", justify="right")
    table.add_column("QUANTILE", justify="right")
    table.add_column("REPS", justify="right")
    for row in rows:
        table.add_row(
            row.estimator, fmt(row.delta), fmt(row.quantile_abs_error), str(row.reps)
        )
    return table


def key_value_table(title, pairs):
    table = Table(title=title, box=box.MINIMAL, show_header=False)
    table.add_column("", no_wrap=True)
    table.add_column("", justify="right")
    for key, value in pairs:
        table.add_row(key, value if isinstance(value, str) else fmt(value, ".6g"))
    return table


def coverage_table(rows):
    table = Table(title="Bound Coverage", box=box.MINIMAL)
    table.add_column("ESTIMATOR", style="cyan", no_wrap=True)
    table.add_column("BOUND")
    table.add_column("TAU", justify="right")
    table.add_column("BOUND VALUE", justify="right")
    table.add_column("COVERAGE", justify="right")
    table.add_column("TARGET", justify="right")
    for row in rows:
        covered = row["empirical_coverage"] >= 1 - row["delta"]
        style = "green" if covered else "red"
        table.add_row(
            row["estimator"],
            row["bound_id"],
            fmt(row["tau"]),
            fmt(row["bound"]),
            f"[{style}]{row['empirical_coverage']:.4f}[/{style}]",
            fmt(1 - row["delta"]),
        )
    return table
