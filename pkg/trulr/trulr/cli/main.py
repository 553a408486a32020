import dataclasses
import json
import logging
import os
import sys

import click

from trulr.bandit.experiment import bandit_config_from_dict, load_bandit_config, run_bandit
from trulr.boundaries import (
    BoundarySpec,
    ProblemConstants,
    bound_constant,
    scaled_bernstein_b,
    truncation_boundary,
    x_star,
)
from trulr.cli.output import (
    console,
    coverage_table,
    err_console,
    grid_progress,
    key_value_table,
    quantile_table,
    setup_logging,
    sweep_table,
)
from trulr.counterexamples import (
    build_continuous_counterexample,
    build_discrete_counterexample,
    coverage_check,
    empirical_tail_probability,
)
from trulr.divergence import alpha_divergence_closed, validate_divergence
from trulr.exceptions import (
    BoundaryConstraintError,
    ConfigError,
    MissingConstantsError,
    TrulrError,
)
from trulr.harness.config import load_config
from trulr.harness.persistence import write_csv, write_manifest
from trulr.harness.presets import PRESETS, preset_config
from trulr.harness.registry import estimator_help_table
from trulr.harness.scenarios import SyntheticScenario
from trulr.harness.sweeps import resolve_estimators, run_mse_sweep, run_quantile_sweep
from trulr.json import ReportEncoder
from trulr.models.distributions import build_distribution
from trulr.models.enums import BoundaryRule, Family, RewardKind
from trulr.models.streams import RandomStream
from trulr.portfolio.config import PortfolioConfig, load_portfolio_config
from trulr.portfolio.experiment import run_portfolio
from trulr.utils import atomic_write

logger = logging.getLogger(__name__)

COVERAGE_COLUMNS = [
    "scenario_id",
    "estimator",
    "bound_id",
    "n",
    "delta",
    "tau",
    "bound",
    "empirical_coverage",
    "reps",
    "seed",
]
RULE_CHOICES = {
    rule.value.replace("_", "-"): rule
    for rule in BoundaryRule
    if rule != BoundaryRule.FIXED
}


def _int_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [int(v) for v in value.split(",")]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got '{value}'")


def _float_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [float(v) for v in value.split(",")]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got '{value}'")


def _distribution_params(ctx, param, value):
    """'0,1.7' or a JSON object/array such as '{"mu": 0, "sigma": 1.7}'."""
    if value is None:
        return None
    value = value.strip()
    if value.startswith(("{", "[")):
        try:
            return json.loads(value)
        except json.JSONDecodeError as e:
            raise click.BadParameter(f"invalid JSON: {e}")
    return _float_list(ctx, param, value)


def _threads(threads):
    """0 means one worker per CPU."""
    return None if threads == 0 else threads


def _require_seed(seed):
    if seed is None:
        raise click.UsageError("--seed is required unless --config supplies one")


def _announce_seed(seed):
    logger.info("seed %d", seed)
    console.print(f"Seed: [bold]{seed}[/bold]")


def _experiment_config(config_path, preset, seed, **flags):
    """Config file or preset with flags on top; a preset needs --seed."""
    if config_path and preset:
        raise click.UsageError("use either --config or --preset, not both")
    if config_path:
        config = load_config(config_path)
    elif preset:
        _require_seed(seed)
        config = preset_config(preset)
    else:
        raise click.UsageError("one of --config or --preset is required")
    return config.override(seed=seed, **flags)


def _saved_at(out_dir):
    console.print(f"Results saved at: [green]{out_dir}[/green]")


config_option = click.option(
    "--config",
    "config_path",
    default=None,
    help="Path to a JSON config (or a manifest.json of an earlier run).",
)
preset_option = click.option(
    "--preset",
    default=None,
    type=click.Choice(sorted(PRESETS)),
    help="Use a built-in scenario instead of --config.",
)
seed_option = click.option(
    "--seed", default=None, type=int, help="Master seed. Required unless --config supplies one."
)
threads_option = click.option(
    "--threads",
    default=1,
    type=click.IntRange(min=0),
    show_default=True,
    help="Worker processes (0 = one per CPU). Does not change results.",
)
out_dir_option = click.option(
    "-o", "--out-dir", default=None, help="Directory where to save results."
)
help_estimators_option = click.option(
    "--help-estimators",
    default=False,
    is_flag=True,
    help="Show estimator codes and exits.",
)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("-v", "--verbose", is_flag=True, help="Log debug details.")
@click.option("-q", "--quiet", is_flag=True, help="Only log warnings; no progress bars.")
@click.pass_context
def cli(ctx, verbose, quiet):
    """
    Likelihood-ratio and truncated likelihood-ratio estimators.

    Flags override config-file values, which override defaults.

    Examples:\n\n
        trulr synthetic --preset beta_i --seed 7 --reps 1000\n
        trulr quantiles --preset beta_i --seed 7 --n-grid 5000 --reps 100000\n
        trulr divergence --family normal --behavior 0,1.7 --target 0.2,4 --alpha 1.2\n
        trulr boundary --rule inf-simple --alpha 1.2 --n 5000 --delta 0.01 --divergence 2.817
    """
    setup_logging(verbose, quiet)
    ctx.obj = {"quiet": quiet}


@cli.command()
@config_option
@preset_option
@seed_option
@threads_option
@click.option("--reps", default=None, type=int, help="Replications per n.")
@click.option("--n-grid", default=None, callback=_int_list, help="e.g. 1000,5000,50000")
@click.option("--delta", default=None, type=float, help="Confidence level for boundaries.")
@click.option(
    "--estimators",
    default=None,
    help="Comma-separated estimator codes, e.g. LR,O,S,M:40. See --help-estimators.",
)
@out_dir_option
@help_estimators_option
@click.pass_context
def synthetic(
    ctx,
    config_path,
    preset,
    seed,
    threads,
    reps,
    n_grid,
    delta,
    estimators,
    out_dir,
    help_estimators,
):
    """MSE of every estimator over a grid of sample sizes."""
    if help_estimators:
        return console.print(estimator_help_table())
    config = _experiment_config(
        config_path,
        preset,
        seed=seed,
        reps=reps,
        n_grid=n_grid,
        delta=delta,
        estimators=estimators.split(",") if estimators else None,
        out_dir=out_dir,
    )
    _announce_seed(config.seed)
    with grid_progress(
        f"Sweeping {config.scenario_id}...", len(config.n_grid), ctx.obj["quiet"]
    ) as advance:
        rows = run_mse_sweep(config, threads=_threads(threads), on_grid_point=advance)
    console.print(sweep_table(rows))
    _saved_at(config.out_dir)


@cli.command()
@config_option
@preset_option
@seed_option
@threads_option
@click.option("--reps", default=None, type=int, help="Replications (>= 10 / min delta).")
@click.option("--n-grid", default=None, callback=_int_list, help="A single sample size.")
@click.option("--delta-grid", default=None, callback=_float_list, help="e.g. 0.1,0.01,0.001")
@click.option("--estimators", default=None, help="Comma-separated estimator codes.")
@out_dir_option
def quantiles(
    config_path, preset, seed, threads, reps, n_grid, delta_grid, estimators, out_dir
):
    """(1 - delta)-quantiles of |error| over a grid of delta at one n."""
    config = _experiment_config(
        config_path,
        preset,
        seed=seed,
        reps=reps,
        n_grid=n_grid,
        delta_grid=delta_grid,
        estimators=estimators.split(",") if estimators else None,
        out_dir=out_dir,
    )
    _announce_seed(config.seed)
    rows = run_quantile_sweep(config, threads=_threads(threads))
    console.print(quantile_table(rows))
    _saved_at(config.out_dir)


@cli.command()
@click.option(
    "--construction",
    default="discrete",
    type=click.Choice(["discrete", "continuous"]),
    show_default=True,
)
@click.option("--a", "a", default=1.0, type=float, show_default=True, help="Support scale.")
@click.option("--alpha", required=True, type=float)
@click.option("--p", default=None, type=float, help="Norm order (continuous only).")
@click.option("--n", "n", required=True, type=int)
@click.option("--delta", required=True, type=float)
@click.option("--reps", default=200_000, type=int, show_default=True)
@seed_option
@threads_option
@click.option("-o", "--out-dir", default="results/anticonc", show_default=True)
def anticonc(construction, a, alpha, p, n, delta, reps, seed, threads, out_dir):
    """Build an anti-concentration instance and measure Pr(|LR error| >= eps)."""
    _require_seed(seed)
    _announce_seed(seed)
    if construction == "discrete":
        instance = build_discrete_counterexample(a, alpha, n, delta)
    else:
        if p is None:
            raise click.UsageError("--p is required for the continuous construction")
        instance = build_continuous_counterexample(a, alpha, p, n, delta)
    tail = empirical_tail_probability(
        instance, reps, RandomStream(seed), threads=_threads(threads)
    )
    pairs = [
        ("theta0", instance.theta0),
        ("theta", instance.theta),
        ("eps", instance.eps),
        ("I_alpha", instance.divergence),
        ("Pr(|err| >= eps)", tail.frequency),
        ("binomial s.e.", tail.binomial_se),
        ("delta", delta),
    ]
    console.print(key_value_table(f"Anti-concentration ({construction})", pairs))
    document = {
        "construction": construction,
        "instance": instance,
        "divergence": instance.divergence,
        "tail": tail,
        "seed": seed,
    }
    atomic_write(
        os.path.join(out_dir, "anticonc.json"),
        json.dumps(document, cls=ReportEncoder, indent=2) + "\n",
    )
    _saved_at(out_dir)


@cli.command()
@config_option
@preset_option
@seed_option
@threads_option
@click.option("--n", "n", default=None, type=int, help="Sample size (default: first of n_grid).")
@click.option("--delta", default=None, type=float, help="Confidence level (default: config).")
@click.option("--reps", default=10_000, type=int, show_default=True)
@click.option("--estimators", default=None, help="Comma-separated estimator codes.")
@out_dir_option
def coverage(
    config_path, preset, seed, threads, n, delta, reps, estimators, out_dir
):
    """Fraction of replications whose error stays within the matching bound."""
    config = _experiment_config(
        config_path,
        preset,
        seed=seed,
        delta=delta,
        estimators=estimators.split(",") if estimators else None,
        out_dir=out_dir,
    )
    _announce_seed(config.seed)
    n = n or config.n_grid[0]
    scenario = SyntheticScenario.from_config(config)
    resolved = resolve_estimators(
        scenario, config.estimators, config.seed, config.pilot_size
    )
    constants = scenario.constants(n, config.delta)
    rows = []
    for e, estimator in enumerate(resolved):
        try:
            result = coverage_check(
                scenario.target,
                scenario.behavior,
                scenario.h,
                estimator.spec,
                constants,
                reps,
                RandomStream(config.seed, e),
                truth=scenario.truth,
                threads=_threads(threads),
            )
        except (MissingConstantsError, BoundaryConstraintError) as err:
            logger.warning("skipping %s: %s", estimator.label, err)
            continue
        rows.append(
            {
                "scenario_id": config.scenario_id,
                "estimator": estimator.label,
                "bound_id": result.bound_id.value,
                "n": n,
                "delta": config.delta,
                "tau": result.tau,
                "bound": result.bound,
                "empirical_coverage": result.empirical_coverage,
                "reps": reps,
                "seed": config.seed,
            }
        )
    console.print(coverage_table(rows))
    write_csv(rows, os.path.join(config.out_dir, "coverage.csv"), COVERAGE_COLUMNS)
    write_manifest(config.out_dir, config, {"n": n, "reps": reps})
    _saved_at(config.out_dir)


@cli.command()
@config_option
@click.option("--dataset", default=None, help="Path to letter-recognition.data.")
@seed_option
@threads_option
@click.option("--theta", default=None, type=float, help="Target policy epsilon-boost.")
@click.option("--theta0", default=None, type=float, help="Behavior policy epsilon-boost.")
@click.option("--alpha", default=None, type=float)
@click.option(
    "--reward",
    "reward_kind",
    default=None,
    type=click.Choice([kind.value for kind in RewardKind]),
)
@click.option("--p", default=None, type=float, help="Norm order for p-norm rules.")
@click.option("--estimators", default=None, help="Comma-separated estimator codes.")
@click.option("--n-grid", default=None, callback=_int_list)
@click.option("--delta", default=None, type=float)
@click.option("--reps", default=None, type=int)
@click.option("--train-frac", default=None, type=float)
@out_dir_option
@click.pass_context
def bandit(ctx, config_path, seed, threads, out_dir, **flags):
    """Offline evaluation of an epsilon-boost policy on letter recognition."""
    if config_path:
        data = load_bandit_config(config_path).to_dict()
    else:
        _require_seed(seed)
        data = {}
    flags.update(seed=seed, out_dir=out_dir)
    changes = {key: value for key, value in flags.items() if value is not None}
    config = bandit_config_from_dict({**data, **changes})
    _announce_seed(config.seed)
    with grid_progress(
        "Evaluating bandit policy...", len(config.n_grid), ctx.obj["quiet"]
    ) as advance:
        rows = run_bandit(config, threads=_threads(threads), on_grid_point=advance)
    console.print(sweep_table(rows, title="Bandit MSE"))
    _saved_at(config.out_dir)


@cli.command()
@config_option
@seed_option
@threads_option
@click.option("--n-grid", default=None, callback=_int_list, help="Paths per week and option.")
@click.option("--reps", default=None, type=int)
@click.option("--delta", default=None, type=float)
@click.option("--reference-paths", default=None, type=int, help="Paths per reference price.")
@click.option(
    "--reference-prices",
    default=None,
    callback=_float_list,
    help="Known option prices; skips the reference simulation.",
)
@out_dir_option
@click.pass_context
def portfolio(ctx, config_path, seed, threads, **flags):
    """MSE of LR, TruLR-M and TruLR-S on the Asian option portfolio."""
    if config_path:
        config = load_portfolio_config(config_path)
    else:
        _require_seed(seed)
        config = PortfolioConfig()
    flags["seed"] = seed
    changes = {
        key: tuple(value) if isinstance(value, list) else value
        for key, value in flags.items()
        if value is not None
    }
    try:
        config = dataclasses.replace(config, **changes)
    except TrulrError as e:
        raise ConfigError(str(e)) from e
    _announce_seed(config.seed)
    with grid_progress(
        "Pricing portfolio...", len(config.n_grid), ctx.obj["quiet"]
    ) as advance:
        rows = run_portfolio(config, threads=_threads(threads), on_grid_point=advance)
    console.print(sweep_table(rows, title="Portfolio MSE"))
    _saved_at(config.out_dir)


@cli.command()
@click.option(
    "--family", required=True, type=click.Choice([family.value for family in Family])
)
@click.option("--behavior", required=True, callback=_distribution_params)
@click.option("--target", required=True, callback=_distribution_params)
@click.option("--alpha", required=True, type=float)
@click.option("--mc", default=None, type=int, help="Also estimate by Monte Carlo with M draws.")
@seed_option
def divergence(family, behavior, target, alpha, mc, seed):
    """Closed-form alpha-divergence, optionally checked by Monte Carlo."""
    family = Family(family)
    target_dist = build_distribution(family, target)
    behavior_dist = build_distribution(family, behavior)
    if mc is None:
        result = alpha_divergence_closed(target_dist, behavior_dist, alpha)
        console.print(key_value_table("Alpha-divergence", [("I_alpha", result.value)]))
        return
    _require_seed(seed)
    _announce_seed(seed)
    check = validate_divergence(target_dist, behavior_dist, alpha, mc, RandomStream(seed))
    pairs = [
        ("I_alpha (closed form)", check.closed.value),
        ("I_alpha (Monte Carlo)", check.mc.value),
        ("Monte Carlo s.e.", check.mc.std_error),
        ("z", check.z_score),
    ]
    console.print(key_value_table("Alpha-divergence", pairs))
    if check.flagged:
        console.print("[red]closed form and Monte Carlo disagree[/red]")


@cli.command()
@click.option("--rule", required=True, type=click.Choice(sorted(RULE_CHOICES)))
@click.option("--alpha", required=True, type=float)
@click.option("--n", "n", required=True, type=int)
@click.option("--delta", required=True, type=float)
@click.option("--divergence", "divergence_value", required=True, type=float)
@click.option("--p", default=None, type=float, help="Norm order for p-norm rules.")
@click.option("--b", default=None, type=float, help="Bernstein constant of h.")
@click.option("--h-p-norm", default=None, type=float, help="||h||_p; scales b when given.")
def boundary(rule, alpha, n, delta, divergence_value, p, b, h_p_norm):
    """Truncation boundary tau for one rule."""
    spec = BoundarySpec(RULE_CHOICES[rule], p=p, b=b)
    constants = ProblemConstants(
        alpha=alpha,
        divergence=divergence_value,
        n=n,
        delta=delta,
        h_p_norm=h_p_norm,
        p=p,
    )
    tau = truncation_boundary(spec, constants)
    b_used = b
    if spec.rule == BoundaryRule.PNORM_BERNSTEIN and h_p_norm is not None:
        b_used = scaled_bernstein_b(b, alpha, divergence_value, p, h_p_norm)
    pairs = [
        ("x*", x_star(spec, alpha, p, b_used)),
        ("bound constant", bound_constant(spec, alpha, p, b_used)),
        ("tau", tau),
    ]
    if b_used is not None:
        pairs.insert(0, ("b", b_used))
    console.print(key_value_table(f"Boundary ({rule})", pairs))


def main(argv=None):
    """Entry point; returns 0 on success, 1 on usage errors, 2 on runtime errors."""
    try:
        result = cli.main(args=argv, prog_name="trulr", standalone_mode=False)
    except (click.UsageError, ConfigError) as e:
        err_console.print(f"[red]error:[/red] {e}", highlight=False)
        return 1
    except click.ClickException as e:
        err_console.print(f"[red]error:[/red] {e.format_message()}", highlight=False)
        return 1
    except click.Abort:
        err_console.print("aborted")
        return 1
    except (TrulrError, OSError) as e:
        err_console.print(f"[red]error:[/red] {e}", highlight=False)
        return 2
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    sys.exit(main())
