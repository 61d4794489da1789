"""
Tables, check reports and structured text output.

Every table is a pandas DataFrame written as CSV with the fixed float format
from OUTPUT_CONFIG, so identical inputs give byte-identical output.
"""

import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from config import OUTPUT_CONFIG
from utils import format_float, format_vector

logger = logging.getLogger(__name__)

CHECK_COLUMNS = ["check", "value", "tolerance", "asserted", "passed", "anchor"]

# property families a check anchor names before its statement
PROPERTIES = (
    "normalization",
    "harmonic recovery",
    "naturality",
    "uniqueness and stability",
    "existence",
    "direction bound",
    "poincare recovery",
    "conformal naturality",
    "resolution",
    "continuity",
    "implicit jacobian",
    "inner recovery",
    "blaschke structure",
    "z^d structure",
    "lift conjecture",
)


def check_row(check, value, tolerance, anchor, asserted=True):
    """
    Builds one row of a check table

    A check passes when value <= tolerance; recorded-only rows always pass.

    Args:
        check (str): Short name of the property
        value (float): Measured residual or violation count
        tolerance (float): Largest accepted value
        anchor (str): "<property>: <statement>", property one of PROPERTIES
        asserted (bool): Whether a failure should fail the run

    Returns:
        dict: Row with CHECK_COLUMNS keys

    Raises:
        ValueError: anchor without a known property prefix
    """
    if anchor.split(": ", 1)[0] not in PROPERTIES or ": " not in anchor:
        raise ValueError(f"anchor {anchor!r} does not start with a known property")
    value = float(value)
    passed = (not asserted) or bool(np.isfinite(value) and value <= tolerance)
    return {
        "check": check,
        "value": value,
        "tolerance": float(tolerance),
        "asserted": bool(asserted),
        "passed": passed,
        "anchor": anchor,
    }


def checks_frame(rows):
    return pd.DataFrame(list(rows), columns=CHECK_COLUMNS)


def failed_checks(checks):
    """Asserted rows that did not pass."""
    if checks.empty:
        return checks
    return checks[checks["asserted"] & ~checks["passed"]]


def summarize_checks(checks):
    """
    Counts of a check table

    Returns:
        dict: total, asserted, recorded, passed, failed
    """
    asserted = checks["asserted"] if not checks.empty else pd.Series(dtype=bool)
    failed = failed_checks(checks)
    return {
        "total": int(len(checks)),
        "asserted": int(asserted.sum()),
        "recorded": int((~asserted).sum()),
        "passed": int(asserted.sum()) - int(len(failed)),
        "failed": int(len(failed)),
    }


def residual_summary(table, column="residual"):
    """
    Statistics of a residual column, NaNs (failed points) excluded

    Returns:
        dict: points, failures, max, mean, median
    """
    values = table[column].dropna() if column in table.columns else pd.Series(dtype=float)
    summary = {"points": int(len(table)), "failures": int(len(table) - len(values))}
    if len(values):
        summary.update(max=values.max(), mean=values.mean(), median=values.median())
    return summary


def format_table(table):
    return table.to_csv(index=False, float_format=OUTPUT_CONFIG["float_format"], lineterminator="\n")


def format_summary(summary):
    """`key: value` lines; floats use the fixed format."""
    lines = []
    for key, value in summary.items():
        if isinstance(value, (float, np.floating)):
            value = format_float(value)
        elif isinstance(value, np.ndarray):
            value = format_vector(value)
        lines.append(f"{key}: {value}")
    return "\n".join(lines) + "\n"


def result_record(result):
    """Structured text for a BarycenterResult."""
    return format_summary({
        "point": np.asarray(result.point),
        "residual": float(result.residual),
        "iterations": int(result.iterations),
        "converged": str(bool(result.converged)).lower(),
    })


@dataclass
class ExperimentReport:
    title: str
    checks: pd.DataFrame
    tables: dict = field(default_factory=dict)

    @property
    def passed(self):
        return failed_checks(self.checks).empty

    def render(self):
        parts = [f"# {self.title}\n", format_table(self.checks)]
        for name, table in self.tables.items():
            parts.append(f"\n[{name}]\n")
            parts.append(format_table(table))
        parts.append("\n")
        parts.append(format_summary(summarize_checks(self.checks)))
        return "".join(parts)


def merge_reports(title, reports):
    """Concatenates the check tables and tables of several reports."""
    checks = pd.concat([r.checks for r in reports], ignore_index=True) if reports else checks_frame([])
    tables = {}
    for report in reports:
        for name, table in report.tables.items():
            tables[f"{report.title}: {name}"] = table
    return ExperimentReport(title, checks, tables)


def write_output(text, path=None):
    """Writes to `path` (parent directories created) or to stdout."""
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    logger.info("wrote %s", path)
