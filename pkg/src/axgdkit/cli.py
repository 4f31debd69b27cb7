"""Command-line benchmark harness.

Subcommands:

* run      — execute the experiment described by a config file and write
             its per-iteration CSV (and optional summary JSON).
* repro    — run a bundled figure preset (fig1 | fig2) and write one CSV
             per panel.
* validate — parse and validate a config file without running anything.
* bench    — time the pure and compiled backends on the same cells and
             report their agreement.

Exit codes: 0 success, 2 invalid configuration, 3 numeric failure inside
one or more cells, 4 filesystem/I-O failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .config import ConfigError, load_config
from .oracles import NumericError
from .runner import (
    benchmark_backends,
    emit_csv,
    emit_json,
    reproduce_figures,
    run_experiment,
    summarize,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="axgdkit",
        description="Benchmark accelerated extra-gradient descent and its "
                    "baselines with primal-dual gap certificates.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1,
                        help="number of worker processes for independent cells")
    common.add_argument("--seed", type=int, default=None,
                        help="override the config's base seed")

    p_run = sub.add_parser("run", parents=[common],
                           help="run the experiment described by a config file")
    p_run.add_argument("--config", required=True, help="path to the config file")
    p_run.add_argument("--out", default=".", help="output directory")

    p_repro = sub.add_parser("repro", parents=[common],
                             help="reproduce a bundled figure preset")
    p_repro.add_argument("--preset", required=True, choices=("fig1", "fig2"))
    p_repro.add_argument("--out", default=".", help="output directory")

    p_val = sub.add_parser("validate",
                           help="validate a config file without running it")
    p_val.add_argument("--config", required=True, help="path to the config file")

    p_bench = sub.add_parser("bench",
                             help="compare the pure and compiled backends")
    p_bench.add_argument("--repeats", type=int, default=3,
                         help="timed repetitions per backend (best kept)")
    return parser


def _report_failures(failures) -> None:
    print(f"numeric failure in {len(failures)} cell(s):", file=sys.stderr)
    for f in failures:
        print(f"  method={f.method} eps_eta={f.eps_eta} seed={f.seed_index}: "
              f"{f.message}", file=sys.stderr)


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config {args.config}: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.seed is not None:
        cfg.base_seed = args.seed

    records, failures = run_experiment(cfg, threads=args.threads)

    csv_name = cfg.out_csv if cfg.out_csv else f"{cfg.label}.csv"
    csv_path = os.path.join(args.out, csv_name)
    try:
        os.makedirs(args.out, exist_ok=True)
        emit_csv(cfg, records, csv_path)
        print(f"wrote {csv_path}")
        if cfg.out_json:
            json_path = os.path.join(args.out, cfg.out_json)
            emit_json(summarize(cfg, records), json_path)
            print(f"wrote {json_path}")
    except OSError as exc:
        print(f"cannot write output under {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO

    if failures:
        _report_failures(failures)
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_repro(args) -> int:
    try:
        written = reproduce_figures(args.preset, args.out, threads=args.threads)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"cannot write output under {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        load_config(args.config)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config {args.config}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"{args.config}: ok")
    return EXIT_OK


def _cmd_bench(args) -> int:
    report = benchmark_backends(repeats=args.repeats)
    print(json.dumps(report, indent=1))
    if not report["kernel_available"]:
        print("compiled backend not available; timed the pure path only",
              file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "repro":
        return _cmd_repro(args)
    if args.command == "validate":
        return _cmd_validate(args)
    return _cmd_bench(args)


if __name__ == "__main__":
    sys.exit(main())
