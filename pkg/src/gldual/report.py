"""Report files and the CSV series derived from them.

Reports are JSON objects::

    {"schema_version": 1, "config": {...}, "environment": {...},
     "records": [...], "summary": {...}}

Keys are sorted and no timestamps are written, so identical runs give
byte-identical files.  CSV series carry a ``schema_version`` column.
"""

from __future__ import annotations

import csv
import json
import os
import platform
import sys

import numpy as np
import scipy

from .config import SCHEMA_VERSION

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def environment_stamp():
    from . import __version__

    return {
        "gldual": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": sys.platform,
    }


def exit_code(records, strict=True):
    """0 all passed, 3 any solver error, else 1 on a failed check.

    With ``strict`` a ``not_applicable`` record (a case named in the config
    whose hypotheses fail) counts as a failure.
    """
    statuses = [r["status"] for r in records]
    if "error" in statuses:
        return EXIT_SOLVER
    if "fail" in statuses or (strict and "not_applicable" in statuses):
        return EXIT_CHECK_FAILED
    return EXIT_OK


def build_report(cfg, records, strict=True, sweep=None):
    counts = {}
    for r in records:
        counts[r["status"]] = counts.get(r["status"], 0) + 1
    report = {
        "schema_version": SCHEMA_VERSION,
        "config": cfg,
        "environment": environment_stamp(),
        "records": records,
        "summary": {"n_records": len(records), "status_counts": counts,
                    "exit_code": exit_code(records, strict)},
    }
    if sweep is not None:
        report["sweep"] = sweep
    return report


def dumps(report):
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(report, path):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(report))


def read_report(path):
    with open(path, encoding="utf-8") as fh:
        report = json.load(fh)
    version = report.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema_version {version!r}")
    return report


# ----------------------------------------------------------------------------
# plot series

GAP_COLUMNS = ["schema_version", "experiment", "case", "start", "h", "N", "gap", "rel_gap"]
LAMBDA_COLUMNS = ["schema_version", "experiment", "start", "beta", "lambda_min_hessian",
                  "lambda_min_bstar"]
SLACK_COLUMNS = ["schema_version", "experiment", "check", "bin_lo", "bin_hi", "count"]


def _fmt(x):
    return "" if x is None else repr(x) if isinstance(x, float) else str(x)


def plot_series(report):
    """Rows of each CSV series, keyed by file name; empty series are dropped."""
    gap, lam, slack = [], [], []
    for r in report.get("records", []):
        v = r["values"]
        if r["check"] in ("gap", "analytic_zero") and r["status"] in ("pass", "fail"):
            gap.append([SCHEMA_VERSION, r["experiment"], r["case"] or r["check"], r["start"],
                        v["h"], v["N"], v["gap"], abs(v["gap"]) / max(1.0, abs(v["J_primal"]))])
        if r["check"] == "gap" and "hessian_lam_min" in v:
            lam.append([SCHEMA_VERSION, r["experiment"], r["start"], v["beta"],
                        v["hessian_lam_min"], v["bstar_lam_min"]])
        if "slack_histogram" in v:
            hist = v["slack_histogram"]
            for lo, hi, c in zip(hist["edges"], hist["edges"][1:], hist["counts"]):
                slack.append([SCHEMA_VERSION, r["experiment"], r["check"], lo, hi, c])
    gap.sort(key=lambda row: (row[4], row[1], str(row[2]), str(row[3])))
    # one row per (experiment, start, beta); several cases share the spectrum
    lam = sorted({tuple(row) for row in lam}, key=lambda row: (row[3], row[1], str(row[2])))
    series = {
        "gap_vs_h.csv": (GAP_COLUMNS, gap),
        "lambda_min_vs_beta.csv": (LAMBDA_COLUMNS, [list(r) for r in lam]),
        "weak_duality_slack.csv": (SLACK_COLUMNS, slack),
    }
    return {name: s for name, s in series.items() if s[1]}


def emit_plot_data(report, out_dir):
    """Write the CSV series of ``report`` into ``out_dir``; returns the paths."""
    series = plot_series(report)
    if not series:
        return []
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, (cols, rows) in sorted(series.items()):
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for row in rows:
                w.writerow([_fmt(x) for x in row])
        paths.append(path)
    return paths
