#!/usr/bin/env python3
"""Sweep the number of simultaneously served bands at 32 antennas and
print mean active antennas and total power per band count."""

import argparse

from sparsebeam.harness import preset_config, records_to_csv, run_experiment, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--parallel", type=int, default=2)
    ap.add_argument("--out", help="also write the per-trial CSV here")
    args = ap.parse_args()

    cfg = preset_config("table2", trials=args.trials, seed=args.seed)
    records = run_experiment(cfg, "table2", parallel=args.parallel)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(records_to_csv(records))

    stats = summarize(records)
    print(f"{args.trials} trials, seed {args.seed}, nt=32, k=4 per band")
    print("nb    mean n_active    mean total power [W]")
    for nb in cfg.nb_list:
        row = stats[(32, nb, "multiband")]
        print(f"{nb:<6d}{row['mean_n_active']:13.2f}{row['mean_total_power_w']:18.3f}")


if __name__ == "__main__":
    main()
