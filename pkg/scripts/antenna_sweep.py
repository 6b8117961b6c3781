#!/usr/bin/env python3
"""Sweep the antenna count for all narrowband methods and print the
mean active-antenna and total-power table (the data behind the
reference antenna-count experiments)."""

import argparse

from sparsebeam.harness import preset_config, records_to_csv, run_experiment, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--parallel", type=int, default=2)
    ap.add_argument("--out", help="also write the per-trial CSV here")
    args = ap.parse_args()

    cfg = preset_config("fig1", trials=args.trials, seed=args.seed)
    records = run_experiment(cfg, "fig1", parallel=args.parallel)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(records_to_csv(records))

    stats = summarize(records)
    methods = cfg.methods
    print(f"{args.trials} trials, seed {args.seed}")
    print("mean active antennas")
    print("nt    " + "".join(f"{m:>10}" for m in methods))
    for nt in cfg.nt_list:
        row = "".join(f"{stats[(nt, 1, m)]['mean_n_active']:10.2f}" for m in methods)
        print(f"{nt:<6d}{row}")
    print("mean total power [W]  (infeasible trials excluded)")
    print("nt    " + "".join(f"{m:>10}" for m in methods))
    for nt in cfg.nt_list:
        row = "".join(f"{stats[(nt, 1, m)]['mean_total_power_w']:10.3f}" for m in methods)
        infeas = sum(stats[(nt, 1, m)]["infeasible"] for m in methods)
        print(f"{nt:<6d}{row}   ({infeas} infeasible)")


if __name__ == "__main__":
    main()
