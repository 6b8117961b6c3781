"""Command-line interface for the Monte-Carlo harness.

Subcommands:

* ``run --config <path> [--out <csv>] [--seed N] [--trials N]
  [--parallel N] [--timing]`` runs a sweep described by a key=value
  config file.
* ``reproduce {fig1|fig2|table1|table2} [--trials N] [--seed N]
  [--out <csv>] [--parallel N] [--timing]`` runs one of the built-in
  reference sweeps.

Exit status 0 on success, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .harness import (
    parse_config_file,
    preset_config,
    records_to_csv,
    run_experiment,
)
from .model import ConfigError


def _add_shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", metavar="CSV", help="output path (default: stdout)")
    p.add_argument("--seed", type=int, help="override the experiment seed")
    p.add_argument("--trials", type=int, help="override the trial count")
    p.add_argument("--parallel", type=int, default=1, metavar="N",
                   help="worker processes (default 1; output is identical)")
    p.add_argument("--timing", action="store_true",
                   help="write measured wall times to the CSV "
                        "(breaks byte-level reproducibility)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsebeam",
                                     description="SINR-constrained total-power "
                                                 "beamforming experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a sweep from a config file")
    run_p.add_argument("--config", required=True, metavar="PATH")
    _add_shared(run_p)

    rep_p = sub.add_parser("reproduce", help="run a built-in reference sweep")
    rep_p.add_argument("target", choices=("fig1", "fig2", "table1", "table2"))
    _add_shared(rep_p)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = parse_config_file(args.config)
            if args.seed is not None:
                cfg = replace(cfg, seed=args.seed)
            if args.trials is not None:
                cfg = replace(cfg, trials=args.trials)
            experiment_id = "run"
        else:
            cfg = preset_config(args.target, trials=args.trials, seed=args.seed)
            experiment_id = args.target
        records = run_experiment(cfg, experiment_id=experiment_id,
                                 parallel=args.parallel)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    csv_text = records_to_csv(records, timing=args.timing)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
