"""Command-line interface.

Subcommands:
    explore CONFIG     run the exploration pipeline and persist the result
    full CONFIG        evaluate the feature on every grid node
    slice RUN_ID       extract a 2-D slice from a stored run (CSV + heatmap)
    errorstudy CONFIG  convergence study (CSV + log-log figure)
    serve              HTTP API over a run store
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .convergence import convergence_study
from .errors import OdescoutError
from .interpolation import InterpolatedField
from .pipeline import run_and_store
from .runconfig import load_run_config, parse_error_study_config
from .store import RunStore


def _add_store_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--store", default="runs", help="run store directory (default: ./runs)")


def _print_record(record) -> None:
    print(f"run id: {record.run_id}")
    if record.relevance_r is not None:
        print(f"relevance r: {record.relevance_r!r}")
    for name, value in record.result.counters.as_dict().items():
        print(f"{name}: {value}")
    print(f"entries: {len(record.result.entries)} of {record.result.grid.size} grid points")
    print(f"elapsed: {record.elapsed:.2f} s")


def _cmd_explore(args: argparse.Namespace) -> int:
    config = load_run_config(args.config)
    store = RunStore(args.store)
    record = run_and_store(store, config)
    _print_record(record)
    return 0


def _cmd_full(args: argparse.Namespace) -> int:
    config = load_run_config(args.config)
    store = RunStore(args.store)
    record = run_and_store(store, config, full=True, workers=args.workers)
    _print_record(record)
    return 0


def _parse_fix_args(items: list[str]) -> dict[str, float]:
    fixed: dict[str, float] = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise OdescoutError(f"--fix expects NAME=VALUE, got {item!r}")
        fixed[name] = float(value)
    return fixed


def _cmd_slice(args: argparse.Namespace) -> int:
    store = RunStore(args.store)
    run = store.load(args.run_id)
    axis_pair = tuple(a.strip() for a in args.axes.split(",") if a.strip())
    if len(axis_pair) != 2:
        raise OdescoutError(f"--axes expects two names, got {args.axes!r}")
    fixed = _parse_fix_args(args.fix or [])
    field = InterpolatedField(run.result)
    slc = field.extract_slice(axis_pair, fixed)

    out_dir = Path(args.out) if args.out else store.run_dir(args.run_id)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"slice-{axis_pair[0]}-{axis_pair[1]}"
    csv_path = out_dir / f"{stem}.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([axis_pair[0], axis_pair[1], "value", "flag"])
        for i, a in enumerate(slc.axis_values[0]):
            for j, b in enumerate(slc.axis_values[1]):
                v = slc.values[i, j]
                writer.writerow([repr(float(a)), repr(float(b)),
                                 "" if np.isnan(v) else repr(float(v)), slc.flags[i, j]])
    print(f"wrote {csv_path}")

    from .plots import plot_slice

    png_path = plot_slice(slc, out_dir / f"{stem}.png")
    print(f"wrote {png_path}")
    return 0


def _cmd_errorstudy(args: argparse.Namespace) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        factory, study = parse_error_study_config(json.load(fh))
    report = convergence_study(factory, study)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "errorstudy.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["grid_size", "n_mean", "n_std", "l1_mean", "l1_std", "i_a_mean", "i_a_std"])
        for lvl in report.levels:
            writer.writerow([lvl.grid_size, repr(lvl.n_mean), repr(lvl.n_std),
                             repr(lvl.l1_mean), repr(lvl.l1_std),
                             repr(lvl.i_a_mean), repr(lvl.i_a_std)])
    print(f"wrote {csv_path}")

    from .plots import plot_error_study

    png_path = plot_error_study(report, out_dir / "errorstudy.png")
    print(f"wrote {png_path}")

    if report.exact:
        print("error is exactly zero at every level; slope undefined (exact)")
    else:
        lo, hi = report.slope_interval
        print(f"fitted log-log slope: {report.slope:.4f} (95% CI [{lo:.4f}, {hi:.4f}])")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    host, sep, port_s = args.addr.partition(":")
    if not sep:
        raise OdescoutError(f"--addr expects HOST:PORT, got {args.addr!r}")
    app = create_app(RunStore(args.store))
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port_s), log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="odescout",
        description="Parameter-space exploration for parametrized ODE features.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explore", help="run relevance-guided exploration from a config file")
    p.add_argument("config", help="run config JSON file")
    _add_store_arg(p)
    p.set_defaults(func=_cmd_explore)

    p = sub.add_parser("full", help="evaluate the feature on the full grid")
    p.add_argument("config", help="run config JSON file")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    _add_store_arg(p)
    p.set_defaults(func=_cmd_full)

    p = sub.add_parser("slice", help="extract a 2-D slice from a stored run")
    p.add_argument("run_id")
    p.add_argument("--axes", required=True, metavar="A,B", help="the two free axes")
    p.add_argument("--fix", action="append", metavar="NAME=VALUE",
                   help="fixed value for each remaining axis (repeatable)")
    p.add_argument("--out", default=None, help="output directory (default: the run directory)")
    _add_store_arg(p)
    p.set_defaults(func=_cmd_slice)

    p = sub.add_parser("errorstudy", help="measure interpolation error vs sample count")
    p.add_argument("config", help="error study JSON file")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=_cmd_errorstudy)

    p = sub.add_parser("serve", help="serve stored runs over HTTP")
    p.add_argument("--addr", default="127.0.0.1:8000", metavar="HOST:PORT")
    _add_store_arg(p)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OdescoutError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"error: unknown run id {exc.args[0]!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
