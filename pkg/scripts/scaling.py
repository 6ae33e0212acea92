"""Wall time of a fixed-budget solve (t_max = N, delta = 4) against N, with
the fitted log-log slope.

    python scripts/scaling.py --sizes 32,64,128,256
"""

import argparse
import time

import numpy as np

from prsamp import bench
from prsamp.model import BINARY01
from prsamp.solver import solve_once
from prsamp.synth import DENSE_COMPLEX, gen_matrix, gen_signal, synthesize


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--sizes", default="32,64,128,256")
    p.add_argument("--delta", type=int, default=4)
    p.add_argument("--reps", type=int, default=3)
    args = p.parse_args()

    sizes = [int(s) for s in args.sizes.split(",")]
    times = []
    for n in sizes:
        inst = synthesize(gen_matrix(BINARY01, args.delta * n, n, n),
                          gen_signal(DENSE_COMPLEX, n, 1.0, n + 1), 30.0, n + 2)
        # epsilon tiny so every run spends the full budget
        cfg = bench.default_config(1, n).replace(t_max=n, epsilon=1e-300, seed=1)
        solve_once(inst, cfg.replace(t_max=1))
        best = float("inf")
        for _ in range(args.reps):
            start = time.perf_counter()
            solve_once(inst, cfg)
            best = min(best, time.perf_counter() - start)
        times.append(best)
        print(f"N={n:>5}  {best:8.3f} s")
    slope = np.polyfit(np.log(sizes), np.log(times), 1)[0]
    print(f"log-log slope {slope:.2f}")


if __name__ == "__main__":
    main()
