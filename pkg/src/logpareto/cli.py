"""Command-line interface.

Every command writes one table as CSV (default) or JSON. CSV output starts
with ``#`` comment lines carrying the command and its full configuration,
then a header row; floats are printed with 10 significant digits. Exit
codes: 0 success, 2 usage or precondition error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import dct_verify, distribution, estimators, information
from .errors import DomainError, NumericalError

SEED_ENV = "LOGPARETO_SEED"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), "#.10g")
    return str(value)


def _jsonable(value):
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def render(command: str, config: dict, columns: list[str], rows: list[list], fmt: str, notes=()) -> str:
    if fmt == "json":
        doc = {
            "command": command,
            "config": config,
            "notes": list(notes),
            "columns": columns,
            "rows": [{c: _jsonable(v) for c, v in zip(columns, row)} for row in rows],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# command: {command}\n")
    buf.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
    for note in notes:
        buf.write(f"# {note}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw else 0


def cmd_constants(args):
    norm = distribution.normalization(args.theta)
    columns = ["theta", "a_theta", "da_dtheta", "score_offset", "median"]
    row = [norm.theta, norm.a_theta, norm.da_dtheta, norm.score_offset, distribution.median(norm.theta)]
    return {"theta": args.theta}, columns, [row], []


def cmd_info(args):
    theta = distribution.check_theta(args.theta)
    columns = ["theta", "kind", "value", "rate", "offset", "trunc_log", "n", "cr_bound", "cr_trivial", "description"]
    config = {"theta": args.theta, "trunc_log": args.trunc_log, "n": args.n, "rtol": args.rtol}
    if args.trunc_log is not None:
        if not args.trunc_log > 1.0:
            raise DomainError("--trunc-log must exceed 1")
        value = information.fisher_truncated(theta, args.trunc_log, rtol=args.rtol)
        row = [theta, "truncated", value, None, None, args.trunc_log, None, None, None,
               f"truncated: J({args.trunc_log:g}) = {value:.10g}"]
        return config, columns, [row], []
    bound = information.cr_bound(theta, args.n)
    info = bound.information
    row = [theta, info.kind, info.value, info.rate, info.offset, None, bound.n, bound.bound, bound.trivial,
           info.describe()]
    return config, columns, [row], []


def _grid(start: float, stop: float, points: int) -> np.ndarray:
    if points < 1:
        raise DomainError("--points must be at least 1")
    if points == 1:
        return np.array([start])
    if not stop > start:
        raise DomainError("--to must exceed --from")
    return np.linspace(start, stop, points)


def cmd_median_curve(args):
    grid = _grid(args.start, args.stop, args.points)
    for t in grid:
        distribution.check_theta(t)
    rows = [list(pair) for pair in distribution.median_curve(grid)]
    config = {"from": args.start, "to": args.stop, "points": args.points}
    return config, ["theta", "median"], rows, []


def cmd_experiment(args):
    report = estimators.run_experiment(
        args.theta, args.n, args.trials, args.estimator, args.seed, workers=args.workers
    )
    columns = [
        "theta", "n", "trials", "estimator", "seed", "mean_estimate", "bias", "bias_se",
        "variance", "variance_se", "rmse", "clamp_rate", "asymptotic_variance",
        "clipped_asymptotic_variance", "cr_bound", "cr_trivial",
    ]
    row = [
        report.theta_true, report.n, report.trials, report.estimator, report.seed,
        report.mean_estimate, report.bias, report.bias_se, report.variance, report.variance_se,
        report.rmse, report.clamp_rate, report.asymptotic_variance,
        report.clipped_asymptotic_variance, report.cr_bound.bound, report.cr_bound.trivial,
    ]
    config = {"theta": args.theta, "n": args.n, "trials": args.trials,
              "estimator": args.estimator, "seed": args.seed}
    return config, columns, [row], []


def cmd_sample(args):
    batch = distribution.sample(args.n, args.theta, args.seed)
    rows = [[i, u, x] for i, (u, x) in enumerate(zip(batch.log_values, batch.values))]
    config = {"theta": args.theta, "n": args.n, "seed": args.seed}
    return config, ["index", "log_x", "x"], rows, []


def cmd_dct_check(args):
    checks = dct_verify.domination_grid()
    violations = sum(not c.ok for c in checks)
    rows = [[c.h, c.x, c.ratio, c.bound, c.ok] for c in checks]
    limit, _ = dct_verify.dominated_limit_integral()
    notes = [
        f"{violations} violations on {len(checks)} grid points",
        f"limit integral at h={dct_verify.LIMIT_LADDER[-1]:g}: {limit:.10g}",
    ]
    return {}, ["h", "x", "ratio", "bound", "ok"], rows, notes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logpareto", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", "-o", default=None, help="write here instead of stdout")
        p.set_defaults(func=func)
        return p

    p = add("constants", cmd_constants, "normalization constant, its derivative, score offset, median")
    p.add_argument("--theta", type=float, required=True)

    p = add("info", cmd_info, "Fisher information and Cramér-Rao bound")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--trunc-log", type=float, default=None, help="truncate at x = e**U")
    p.add_argument("--n", type=int, default=1, help="sample size for the bound")
    p.add_argument("--rtol", type=float, default=1e-12, help="quadrature relative tolerance")

    p = add("median-curve", cmd_median_curve, "population median over a theta grid")
    p.add_argument("--from", dest="start", type=float, default=1.0)
    p.add_argument("--to", dest="stop", type=float, default=2.0)
    p.add_argument("--points", type=int, default=101)

    p = add("experiment", cmd_experiment, "Monte Carlo estimator benchmark")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--n", type=int, required=True, help="odd sample size")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--estimator", choices=("median", "mle"), default="median")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)

    p = add("sample", cmd_sample, "draw a sample")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)

    add("dct-check", cmd_dct_check, "check the dominating bound and the limit integral")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", 0) is None:
        try:
            args.seed = _default_seed()
        except ValueError:
            parser.error(f"{SEED_ENV} must be an integer")
    try:
        config, columns, rows, notes = args.func(args)
    except DomainError as exc:
        print(f"logpareto {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"logpareto {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 3
    text = render(args.command, config, columns, rows, args.format, notes)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
