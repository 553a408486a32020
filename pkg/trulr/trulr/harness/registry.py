import math
from collections import namedtuple
from dataclasses import dataclass
from typing import List

from rich.table import Table

from trulr.boundaries import BoundarySpec
from trulr.exceptions import ConfigError
from trulr.models.enums import BoundaryRule


@dataclass(frozen=True)
class LabeledEstimator:
    """An estimator as named in configs ("M:40") and as labeled in outputs."""

    code: str
    label: str
    spec: BoundarySpec


def _float_or_none(params, index):
    return float(params[index]) if len(params) > index else None


def _lr(*params):
    return BoundarySpec.lr()


def _inf_optimal(*params):
    return BoundarySpec(BoundaryRule.INF_OPTIMAL)


def _inf_simple(*params):
    return BoundarySpec(BoundaryRule.INF_SIMPLE)


def _pnorm_simple(*params):
    return BoundarySpec(BoundaryRule.PNORM_SIMPLE, p=_float_or_none(params, 0))


def _pnorm_mgf(*params):
    return BoundarySpec(BoundaryRule.PNORM_MGF_OPTIMAL, p=_float_or_none(params, 0))


def _bernstein(*params):
    if len(params) < 1:
        raise ConfigError("B needs a Bernstein constant, e.g. B:1.7")
    return BoundarySpec(
        BoundaryRule.PNORM_BERNSTEIN, b=float(params[0]), p=_float_or_none(params, 1)
    )


def _bernstein_estimated(*params):
    return BoundarySpec(
        BoundaryRule.PNORM_BERNSTEIN, estimate_b=True, p=_float_or_none(params, 0)
    )


def _fixed(*params):
    if len(params) < 1:
        raise ConfigError("F needs a boundary, e.g. F:1")
    tau = math.inf if params[0] in ("inf", "+inf") else float(params[0])
    return BoundarySpec(BoundaryRule.FIXED, tau_fixed=tau)


# Estimator must have a CODE, LABEL, DESCRIPTION, BUILD_FN.
CliEstimator = namedtuple("CliEstimator", ["code", "label", "description", "build_fn"])
CLI_ESTIMATORS = [
    CliEstimator("LR", "LR", "Plain likelihood-ratio estimator (no truncation).", _lr),
    CliEstimator(
        "O",
        "TruLR-O",
        "Truncation at the optimal inf-norm boundary. Needs 1 < alpha <= 2.",
        _inf_optimal,
    ),
    CliEstimator(
        "S", "TruLR-S", "Simple inf-norm boundary (x* = 1).", _inf_simple
    ),
    CliEstimator(
        "SP",
        "TruLR-S",
        "Simple p-norm boundary (x* = 1). Optional param is p.",
        _pnorm_simple,
    ),
    CliEstimator(
        "M",
        "TruLR-M",
        "Optimal p-norm boundary under the MGF condition. Optional param is p.",
        _pnorm_mgf,
    ),
    CliEstimator(
        "B",
        "TruLR-B",
        "Optimal p-norm boundary under Bernstein's condition with known b. "
        + "Params are B, then optional p.",
        _bernstein,
    ),
    CliEstimator(
        "E",
        "TruLR-E",
        "Like B, but b = 2 * psi_1-norm estimated from a pilot run. Optional param is p.",
        _bernstein_estimated,
    ),
    CliEstimator("F", "TruLR-F", "Fixed boundary. Param is TAU.", _fixed),
]


def parse_estimator_code(code: str) -> LabeledEstimator:
    parts = code.strip().split(":")
    for cli_estimator in CLI_ESTIMATORS:
        if cli_estimator.code == parts[0]:
            try:
                spec = cli_estimator.build_fn(*parts[1:])
            except ValueError as e:
                raise ConfigError(f"bad estimator code '{code}': {e}") from e
            label = cli_estimator.label
            if len(parts) > 1:
                label += "[" + ":".join(parts[1:]) + "]"
            return LabeledEstimator(code.strip(), label, spec)
    raise ConfigError(f"unknown estimator code '{parts[0]}'")


def parse_estimator_string(estimator_string: str) -> List[LabeledEstimator]:
    return [parse_estimator_code(code) for code in estimator_string.split(",")]


def register_cli_estimator(code, label, description, build_fn):
    CLI_ESTIMATORS.append(CliEstimator(code, label, description, build_fn))


def estimator_help_table():
    table = Table(title="Estimator Legend")
    table.add_column("CODE", justify="center", style="cyan", no_wrap=True)
    table.add_column("ESTIMATOR")
    table.add_column("DESCRIPTION")
    for estimator in CLI_ESTIMATORS:
        table.add_row(estimator.code, estimator.label, estimator.description)
    return table
