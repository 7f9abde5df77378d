"""Fixed-schema CSV and JSON emission for experiment outputs.

Column order is part of the contract; numbers are written in shortest
round-trip form so byte-identical re-execution is achievable.  The
summary's ``elapsed_seconds`` field is always null in the file (wall
time is printed to the console instead): outputs must be a pure
function of the config, and a measured duration is not.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .convergence import ConvergenceReport, SuccessCurve, geometric_bound

SCHEMA_VERSION = "1"
RUN_CSV_COLUMNS = ("run", "t", "gap", "best_f")
CURVE_CSV_COLUMNS = ("t", "successes", "runs", "ci_lo", "ci_hi", "bound")


def format_number(x) -> str:
    """Shortest decimal that round-trips; empty string for missing."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def write_run_csv(path: Path, rows: Sequence[tuple]) -> None:
    """Rows are (run, t, gap, best_f) tuples, one per run per step."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUN_CSV_COLUMNS)
        for run, t, gap, best_f in rows:
            writer.writerow(
                (run, t, format_number(gap), format_number(best_f))
            )


def write_curve_csv(
    path: Path, curve: SuccessCurve, delta_value: Optional[float]
) -> None:
    """One row per step; the bound column is blank without a certified delta."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_CSV_COLUMNS)
        for t in range(curve.horizon + 1):
            bound = (
                geometric_bound(delta_value, t) if delta_value is not None else None
            )
            writer.writerow(
                (
                    t,
                    curve.successes[t],
                    curve.runs,
                    format_number(curve.ci_lo[t]),
                    format_number(curve.ci_hi[t]),
                    format_number(bound),
                )
            )


def write_summary(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True))
        fh.write("\n")


def delta_payload(delta) -> Optional[dict]:
    if delta is None:
        return None
    return {
        "eps": delta.eps,
        "value": delta.delta,
        "method": delta.method,
        "certified": delta.certified,
        "argmin_state": _stringify_state(delta.argmin_state),
    }


def _stringify_state(key) -> Optional[list]:
    if key is None:
        return None
    return [list(values) for values in key]


def verdicts_payload(report: ConvergenceReport) -> dict:
    per_t = None
    if report.verdicts is not None:
        per_t = [
            {
                "t": v.t,
                "bound": v.bound,
                "rate": v.rate,
                "satisfied": v.satisfied,
            }
            for v in report.verdicts
        ]
    return {
        "premise": report.premise,
        "per_t": per_t,
        "absorption": None
        if report.absorption is None
        else {
            "holds": report.absorption.holds,
            "mode": report.absorption.mode,
            "checked": report.absorption.checked,
        },
        "partial_sums": list(report.partial_sums.values),
        "partial_sum_reference": report.partial_sums.reference,
        "partial_sums_dominated": report.partial_sums.dominated,
    }


def summary_payload(config_echo: dict, delta, verdicts: Optional[dict]) -> dict:
    """The five contractual top-level keys of summary.json."""
    return {
        "config": config_echo,
        "delta": delta_payload(delta),
        "verdicts": verdicts,
        "elapsed_seconds": None,
        "version": SCHEMA_VERSION,
    }


@dataclass(frozen=True)
class ReportBundle:
    """Paths of everything one command wrote."""

    out_dir: Path
    run_csv: Optional[Path]
    curve_csv: Optional[Path]
    summary_json: Path
