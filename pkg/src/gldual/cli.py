"""Command line: ``gldual verify | sweep | plotdata``.

Exit codes: 0 all checks passed, 1 a check failed, 2 bad config or
arguments, 3 the Newton solver failed.  Set ``GLDUAL_LOG`` (DEBUG, INFO,
WARNING, ...) to control log verbosity.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from importlib import resources

import numpy as np

from .config import ConfigError, load_config, with_param
from .report import (
    EXIT_CONFIG,
    EXIT_OK,
    build_report,
    emit_plot_data,
    read_report,
    write_report,
)
from .runner import run_experiment

LOG_ENV = "GLDUAL_LOG"
BUNDLED = ("f0_case", "theorem2_sweep", "complex_case")

log = logging.getLogger("gldual")


def bundled_config(name):
    """Path of a config shipped with the package."""
    return str(resources.files("gldual") / "configs" / f"{name}.yaml")


def _resolve(path):
    if not os.path.exists(path) and path in BUNDLED:
        return bundled_config(path)
    return path


def _default_output(config_path, suffix):
    stem = os.path.splitext(os.path.basename(config_path))[0]
    return f"{stem}{suffix}.json"


def _run(cfg, strict=True, sweep=None):
    records = []
    for exp in cfg["experiments"]:
        recs = run_experiment(exp)
        if sweep is not None:
            for r in recs:
                r["sweep"] = {sweep["param"]: exp["params"][sweep["param"]]}
        records.extend(recs)
    return records


def _summarize(records, out):
    for r in records:
        tag = r["case"] or r["check"]
        start = f" [{r['start']}]" if r["start"] else ""
        sweep = "".join(f" {k}={v:g}" for k, v in r.get("sweep", {}).items())
        msg = f": {r['message']}" if r["message"] and r["status"] != "pass" else ""
        print(f"{r['status'].upper():15s}{r['experiment']}/{tag}{start}{sweep}{msg}", file=out)


def cmd_verify(args):
    path = _resolve(args.config)
    cfg = load_config(path)
    records = _run(cfg)
    report = build_report(cfg, records)
    out = args.output or _default_output(path, ".report")
    write_report(report, out)
    _summarize(records, sys.stdout)
    print(f"report written to {out}")
    return report["summary"]["exit_code"]


def cmd_sweep(args):
    path = _resolve(args.config)
    cfg = load_config(path)
    if args.steps < 1:
        raise ConfigError("--steps must be at least 1")
    values = np.linspace(args.start, args.stop, args.steps) if args.steps > 1 else [args.start]
    records = []
    for value in values:
        records.extend(_run(with_param(cfg, args.param, float(value)), strict=False,
                            sweep={"param": args.param}))
    sweep = {"param": args.param, "from": args.start, "to": args.stop, "steps": args.steps}
    report = build_report(cfg, records, strict=False, sweep=sweep)
    out = args.output or _default_output(path, ".sweep")
    write_report(report, out)
    _summarize(records, sys.stdout)
    print(f"report written to {out}")
    return report["summary"]["exit_code"]


def cmd_plotdata(args):
    report = read_report(args.report)
    paths = emit_plot_data(report, args.out_dir)
    for p in paths:
        print(p)
    return EXIT_OK


_PARAM_ALIASES = {"β": "beta", "γ": "gamma", "α": "alpha", "ρ": "rho"}


def build_parser():
    ap = argparse.ArgumentParser(prog="gldual", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run every check of a config and write a report")
    v.add_argument("config", help=f"config file, or a bundled name: {', '.join(BUNDLED)}")
    v.add_argument("-o", "--output", help="report path (default <config>.report.json)")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="rerun a config over a range of one coefficient")
    s.add_argument("config")
    s.add_argument("--param", required=True, help="coefficient name: beta, gamma, alpha or rho")
    s.add_argument("--from", dest="start", type=float, required=True)
    s.add_argument("--to", dest="stop", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("-o", "--output", help="report path (default <config>.sweep.json)")
    s.set_defaults(func=cmd_sweep)

    d = sub.add_parser("plotdata", help="write CSV series from a report")
    d.add_argument("report")
    d.add_argument("out_dir")
    d.set_defaults(func=cmd_plotdata)
    return ap


def configure_logging():
    level = os.environ.get(LOG_ENV, "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if getattr(args, "param", None) is not None:
        args.param = _PARAM_ALIASES.get(args.param, args.param)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
