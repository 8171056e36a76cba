"""``tailcheck`` command line: test a sample, reproduce the null ECDFs, build
critical-value tables.

Exit codes: 0 success (whatever the test verdict), 2 unreadable or empty
input, 3 no exceedances above the threshold, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from itertools import combinations
from pathlib import Path

import numpy as np

from . import __version__
from .core_model import NoExceedancesError, SmallTailWarning, make_tail_sample
from .l2h_geometry import BasisCheckError, DenominatorError
from .quadrature import QuadratureError
from .simulation import (
    FORMAT_VERSION,
    SimulationConfig,
    ThresholdTooHighError,
    build_critical_tables,
    ecdf_sup_distance,
    load_tables,
    run_monte_carlo,
    save_tables,
)
from .statistics import StatisticReport, evaluate_sample, p_value

EXIT_INPUT = 2
EXIT_NO_TAIL = 3
EXIT_NUMERIC = 4


class InputError(ValueError):
    pass


def read_observations(path) -> np.ndarray:
    """Load a univariate sample.

    Accepts a JSON array, or text with one number per line where blank lines
    and lines starting with ``#`` are ignored and the first remaining line may
    be a header.  Any other unparsable line is an error.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    stripped = text.strip()
    if not stripped:
        raise InputError(f"{path} is empty")
    if stripped.startswith("["):
        try:
            values = json.loads(stripped)
            arr = np.array(values, dtype=float)
        except (ValueError, TypeError) as exc:
            raise InputError(f"{path}: not a JSON array of numbers") from exc
        if arr.ndim != 1:
            raise InputError(f"{path}: expected a flat JSON array")
    else:
        values, bad, header_seen = [], [], False
        for lineno, line in enumerate(text.splitlines(), start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            try:
                values.append(float(s))
            except ValueError:
                if not values and not header_seen:
                    header_seen = True
                else:
                    bad.append(lineno)
        if bad:
            shown = ", ".join(map(str, bad[:20])) + (" ..." if len(bad) > 20 else "")
            raise InputError(f"{path}: malformed numeric value on line(s) {shown}")
        arr = np.array(values, dtype=float)
    if arr.size == 0:
        raise InputError(f"{path} contains no observations")
    if not np.isfinite(arr).all():
        raise InputError(f"{path} contains non-finite values")
    return arr


def file_digest(path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def make_manifest(command, config, inputs=(), seed=None, timestamp=False) -> dict:
    """Provenance block embedded in every output.

    Wall-clock time is left out unless asked for, so reruns stay byte-identical.
    """
    manifest = {
        "command": command,
        "config": config,
        "inputs": {str(p): file_digest(p) for p in inputs},
        "seed": seed,
        "library_version": __version__,
        "format_version": FORMAT_VERSION,
    }
    if timestamp:
        manifest["created"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    return manifest


def _write_json(path, doc):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _stats_arg(text):
    kinds = tuple(s.strip() for s in text.split(",") if s.strip())
    if not kinds or set(kinds) - {"ks", "cvm", "ad"}:
        raise argparse.ArgumentTypeError("statistics must be a comma list from ks,cvm,ad")
    return kinds


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def cmd_test(args) -> int:
    import warnings

    raw = read_observations(args.data)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SmallTailWarning)
        sample = make_tail_sample(raw, args.x0, min_tail=args.min_tail)
    theta_hat, process, stats = evaluate_sample(sample, args.grid_delta, args.grid_max)
    grid = (args.grid_delta, args.grid_max)

    if args.table:
        tables = load_tables(args.table)
        table_info = {"source": str(args.table)}
    else:
        # With the standard Pareto law and x0 = 1 every draw exceeds the threshold,
        # so the null tables are built at exactly the observed tail size.
        cfg = SimulationConfig(distribution="pareto", theta0=1.0, n=sample.m, x0=1.0, reps=args.reps,
                               master_seed=args.seed, delta=args.grid_delta, x_max=args.grid_max,
                               min_tail=1)
        tables = build_critical_tables(cfg, args.workers)
        table_info = {"source": "on-the-fly", "config": cfg.to_dict()}

    p_values = {}
    for kind, value in stats.items():
        if kind in tables:
            p_values[kind] = p_value(value, tables[kind], statistic=kind, grid=grid)

    report = StatisticReport(
        ks=stats["ks"], cvm=stats["cvm"], ad=stats["ad"], p_values=p_values,
        metadata={
            "x0": sample.x0, "n": sample.n, "m": sample.m, "theta_hat": theta_hat,
            "grid": {"delta": args.grid_delta, "x_max": args.grid_max},
            "table": table_info,
            "warnings": [str(w.message) for w in caught],
        })
    doc = {"format_version": FORMAT_VERSION, **report.as_dict(),
           "process": {"x": [float(x) for x in process.x_grid], "values": [float(v) for v in process.values]},
           "manifest": make_manifest("test", _config_echo(args), [args.data] + ([args.table] if args.table else []),
                                     seed=None if args.table else args.seed, timestamp=args.timestamp)}
    _write_json(args.out, doc)
    return 0


def _config_echo(args) -> dict:
    skip = {"func", "workers", "timestamp", "out", "out_dir"}
    out = {}
    for k, v in vars(args).items():
        if k in skip:
            continue
        out[k] = list(v) if isinstance(v, tuple) else (str(v) if isinstance(v, Path) else v)
    return out


def cmd_simulate(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    curves_by_label = {}
    for spec in args.dist:
        cfg = SimulationConfig.from_dist_spec(
            spec, n=args.n, x0=args.x0, reps=args.reps, master_seed=args.seed, delta=args.grid_delta,
            x_max=args.grid_max, statistics=args.stats, min_tail=args.min_tail,
            max_discard_fraction=args.max_discard)
        curves = run_monte_carlo(cfg, args.workers)
        curves_by_label[cfg.label] = curves
        for kind, curve in curves.items():
            with open(out_dir / f"{cfg.label}_{kind}.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["value", "ecdf"])
                for v, lv in zip(curve.values, curve.levels()):
                    w.writerow([repr(float(v)), repr(float(lv))])
        _write_json(out_dir / f"{cfg.label}_curves.json", {
            "format_version": FORMAT_VERSION,
            "curves": {k: c.to_dict() for k, c in curves.items()},
            "manifest": make_manifest("simulate", cfg.to_dict(), seed=args.seed, timestamp=args.timestamp),
        })
    if len(curves_by_label) > 1:
        dist = {f"{a}~{b}": {k: ecdf_sup_distance(curves_by_label[a][k], curves_by_label[b][k]) for k in args.stats}
                for a, b in combinations(curves_by_label, 2)}
        _write_json(out_dir / "sup_distances.json", {"format_version": FORMAT_VERSION, "distances": dist})
    return 0


def cmd_table(args) -> int:
    cfg = SimulationConfig(distribution="pareto", theta0=args.theta0, n=args.n, x0=args.x0, reps=args.reps,
                           master_seed=args.seed, delta=args.grid_delta, x_max=args.grid_max,
                           statistics=args.stats, min_tail=args.min_tail, max_discard_fraction=args.max_discard)
    tables = build_critical_tables(cfg, args.workers)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_tables(tables, args.out, manifest=make_manifest("table", cfg.to_dict(), seed=args.seed,
                                                         timestamp=args.timestamp))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tailcheck", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, reps_default):
        p.add_argument("--grid-delta", type=_positive, default=0.1)
        p.add_argument("--grid-max", type=_positive, default=8.0)
        p.add_argument("--reps", type=int, default=reps_default)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: $TAILCHECK_THREADS or 1); never changes results")
        p.add_argument("--timestamp", action="store_true", help="record wall-clock time in the manifest")

    p = sub.add_parser("test", help="test a sample for a regularly varying tail")
    p.add_argument("--data", required=True, type=Path)
    p.add_argument("--x0", required=True, type=_positive)
    p.add_argument("--table", type=Path, default=None, help="critical-value table file from 'tailcheck table'")
    p.add_argument("--min-tail", type=int, default=40)
    p.add_argument("--out", required=True, type=Path)
    common(p, 999)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", help="null ECDFs of the statistics")
    p.add_argument("--dist", required=True, action="append", help="pareto:THETA[:SCALE] or cauchy; repeatable")
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--x0", required=True, type=_positive)
    p.add_argument("--stats", type=_stats_arg, default=("ks", "cvm", "ad"))
    p.add_argument("--min-tail", type=int, default=40)
    p.add_argument("--max-discard", type=float, default=0.5)
    p.add_argument("--out-dir", required=True, type=Path)
    common(p, 2000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("table", help="build a critical-value table under a Pareto null")
    p.add_argument("--theta0", type=_positive, default=1.0)
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--x0", required=True, type=_positive)
    p.add_argument("--stats", type=_stats_arg, default=("ks", "cvm", "ad"))
    p.add_argument("--min-tail", type=int, default=40)
    p.add_argument("--max-discard", type=float, default=0.5)
    p.add_argument("--out", required=True, type=Path)
    common(p, 2000)
    p.set_defaults(func=cmd_table)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"tailcheck: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoExceedancesError as exc:
        print(f"tailcheck: {exc}; lower --x0", file=sys.stderr)
        return EXIT_NO_TAIL
    except (QuadratureError, BasisCheckError, DenominatorError) as exc:
        print(f"tailcheck: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ThresholdTooHighError as exc:
        print(f"tailcheck: {exc}", file=sys.stderr)
        return EXIT_NO_TAIL
    except ValueError as exc:
        print(f"tailcheck: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
