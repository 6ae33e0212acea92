"""Phase-transition grid over (delta, rho) for either scenario.

    python scripts/phase_transition.py --scenario 1 --out pt1.csv
    python scripts/phase_transition.py --scenario 2 --full-scale --out pt2.csv

Prints the best-of-trials metric as a rho x delta table and writes the CSV.
``PRSAMP_THREADS`` sets the number of worker processes.
"""

import argparse

import numpy as np

from prsamp import bench


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--scenario", type=int, choices=[1, 2], default=1)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--points", type=int, default=8, help="grid points per axis")
    p.add_argument("--snr", type=float, default=30.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--full-scale", action="store_true", help="N=256, 50 trials")
    p.add_argument("--out", default="phase_transition.csv")
    args = p.parse_args()

    n = args.n or (256 if args.full_scale else 64)
    trials = args.trials or (50 if args.full_scale else 10)
    top_delta, top_rho = (4.0, 1.0) if args.scenario == 1 else (2.0, 0.5)
    deltas = [round(top_delta * (k + 1) / args.points, 6) for k in range(args.points)]
    rhos = [round(top_rho * (k + 1) / args.points, 6) for k in range(args.points)]
    spec = bench.GridSpec(n, deltas, rhos, trials, args.snr, args.scenario, master_seed=args.seed)
    result = bench.run_grid(spec)
    bench.emit_csv(result, args.out)

    table = result.matrix()
    print(f"best-of-{trials} {spec.metric}, N={n}, threshold {spec.threshold}")
    print("rho \\ delta " + " ".join(f"{d:>7.3f}" for d in deltas))
    for rho, row in zip(rhos, table):
        marks = " ".join(f"{v:>6.3f}{'*' if ok else ' '}" for v, ok in
                         zip(row, _success(row, spec)))
        print(f"{rho:>11.3f} {marks}")
    print(f"* = success; wrote {args.out}")


def _success(row, spec):
    row = np.asarray(row)
    return row < spec.threshold if spec.scenario == 1 else row >= spec.threshold


if __name__ == "__main__":
    main()
