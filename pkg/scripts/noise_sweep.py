"""NMSE against sampling factor at several noise levels (dense complex
signal, binary matrix).

    python scripts/noise_sweep.py --n 64 --snr 30,20,10,5 --out noise.csv
"""

import argparse

from prsamp import bench


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--snr", default="30,20,10,5")
    p.add_argument("--deltas", default="1,2,3,4")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="noise_sweep.csv")
    args = p.parse_args()

    snrs = [float(s) for s in args.snr.split(",")]
    deltas = [float(d) for d in args.deltas.split(",")]
    cells = bench.run_noise_sweep(args.n, deltas, snrs, args.trials, master_seed=args.seed)
    bench.emit_csv(cells, args.out)

    print("snr_db \\ delta " + " ".join(f"{d:>9.2f}" for d in deltas))
    for snr in snrs:
        row = [c.best_metric for c in cells if c.snr_db == snr]
        print(f"{snr:>14.1f} " + " ".join(f"{v:>9.2e}" for v in row))
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
