"""Audit error versus released sample size at fixed epsilon, with the black-box baseline.

    python3 scripts/sweep_sample_size.py --epsilon 10 --reps 10
"""

import argparse
import warnings
from pathlib import Path

from p2nia.desk import make_desk_data
from p2nia.experiments import SweepConfig, run_sweep


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", default="100,250,500,1000,2500,5000")
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--epsilon", type=float, default=10.0)
    ap.add_argument("--rows", type=int, default=25_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="results/sample_size.csv")
    args = ap.parse_args()

    cfg = SweepConfig("sample_size", tuple(int(v) for v in args.grid.split(",")), repetitions=args.reps,
                      base_seed=args.seed, epsilon=args.epsilon)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = run_sweep(make_desk_data(args.rows, args.seed), cfg, jobs=args.jobs)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    result.write_csv(args.out)

    means = result.mean_errors()
    print(f"{'mechanism':<10}{'n_prime':>9}  " + "  ".join(f"{m:>24}" for m in cfg.metrics))
    for mech in cfg.mechanisms:
        for v in cfg.grid:
            print(f"{mech:<10}{v:>9}  " + "  ".join(f"{means[(mech, v, m)]:>24.4f}" for m in cfg.metrics))


if __name__ == "__main__":
    main()
