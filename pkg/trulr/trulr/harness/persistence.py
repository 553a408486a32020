"""
CSV and manifest writers. Every file is written atomically.
"""

import dataclasses
import json
import logging
import os
from typing import Any, Dict, Optional, Sequence

import pandas as pd

from trulr.json import ReportEncoder
from trulr.utils import atomic_write

logger = logging.getLogger(__name__)

MSE_COLUMNS = [
    "scenario_id",
    "estimator",
    "n",
    "reps",
    "mse",
    "mse_stderr",
    "bias",
    "variance",
    "mean_tau",
    "frac_truncated",
    "seed",
]
QUANTILE_COLUMNS = [
    "scenario_id",
    "estimator",
    "delta",
    "quantile_abs_error",
    "reps",
    "seed",
]
FLOAT_FORMAT = "%.17g"


def results_frame(rows: Sequence, columns) -> pd.DataFrame:
    records = [dataclasses.asdict(row) if dataclasses.is_dataclass(row) else row for row in rows]
    return pd.DataFrame.from_records(records, columns=columns)


def write_csv(rows: Sequence, path, columns) -> str:
    """Rows (dataclasses or dicts) to CSV with 17 significant digits; NaN -> empty."""
    frame = results_frame(rows, columns)
    atomic_write(path, frame.to_csv(index=False, float_format=FLOAT_FORMAT, na_rep=""))
    logger.info("wrote %d rows to %s", len(frame), path)
    return path


def write_manifest(out_dir, config, extra: Optional[Dict[str, Any]] = None) -> str:
    """manifest.json echoing the resolved config (and optional run facts)."""
    path = os.path.join(out_dir, "manifest.json")
    document = {"config": config}
    if extra:
        document.update(extra)
    atomic_write(path, json.dumps(document, cls=ReportEncoder, indent=2) + "\n")
    return path
