"""Command-line front end.

    prsamp solve    --synthetic --scenario calib --n 64 --delta 4 --snr 30 --out run/
    prsamp solve    --matrix H.txt --measurements y.txt [--intensity] --out run/
    prsamp preset   calibration --n 64
    prsamp bench pt --scenario 1 --n 64 --grid 4x4 --trials 5 --seed 1 --out pt.csv
    prsamp bench noise --n 64 --snr 30,20,10,5 --out noise.csv
    prsamp selftest

Settings resolve as flags > ``--config`` file > preset.  Exit codes: 0 success,
1 error, 2 iteration budget exhausted without convergence.
"""

import argparse
import os
import secrets
import sys

import numpy as np

from . import bench
from .fileio import (
    FileFormatError,
    atomic_write_text,
    format_config,
    read_config,
    read_matrix,
    read_measurements,
    read_signal,
    write_record,
    write_signal,
)
from .model import (
    BINARY01,
    COMPLEX_GAUSSIAN,
    BinaryPrior,
    ChannelSpec,
    GaussianPrior,
    ProblemInstance,
    validate,
)
from .solver import PRESETS, solve_with_restarts
from .synth import BINARY, DENSE_COMPLEX, gen_matrix, gen_signal, nmse_phase_aligned, synthesize

EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2

SCENARIOS = {"calib": 1, "calibration": 1, "1": 1, "recovery": 2, "recov": 2, "2": 2}


class CLIError(Exception):
    pass


def _floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _add_solver_flags(p):
    g = p.add_argument_group("solver")
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--config", help="key=value config file")
    g.add_argument("--alpha", type=float)
    g.add_argument("--alpha2d", type=float)
    g.add_argument("--tmax", type=int)
    g.add_argument("--epsilon", type=float,
                   help="convergence threshold per coordinate (times N) unless --epsilon-absolute")
    g.add_argument("--epsilon-absolute", action="store_true")
    g.add_argument("--v0", type=float)
    g.add_argument("--xv0", type=float)
    g.add_argument("--restarts", type=int)
    g.add_argument("--prior", choices=["gaussian", "binary"])
    g.add_argument("--channel", choices=["rician", "awgn"])
    g.add_argument("--damp-output", action="store_true")
    g.add_argument("--seed", type=int)


def _resolve_seed(args, out):
    if args.seed is None:
        args.seed = secrets.randbits(63)
        out(f"seed={args.seed}")
    return args.seed


def _apply_flags(cfg, args, n, rho=None):
    changes = {}
    for flag, key in (("alpha", "alpha"), ("alpha2d", "alpha2d"), ("tmax", "t_max"),
                      ("v0", "v0"), ("xv0", "xv0"), ("restarts", "restarts"),
                      ("seed", "seed")):
        value = getattr(args, flag, None)
        if value is not None:
            changes[key] = value
    if getattr(args, "epsilon", None) is not None:
        changes["epsilon"] = args.epsilon if args.epsilon_absolute else args.epsilon * n
    if getattr(args, "damp_output", False):
        changes["damp_output"] = True
    if getattr(args, "prior", None) == "gaussian" and not isinstance(cfg.input_prior, GaussianPrior):
        changes["input_prior"] = GaussianPrior()
        changes["x0"] = "random"
    elif getattr(args, "prior", None) == "binary":
        changes["input_prior"] = BinaryPrior(rho if rho is not None else 0.5)
    if getattr(args, "channel", None) is not None:
        changes["output_channel"] = ChannelSpec(args.channel, cfg.output_channel.delta)
    return cfg.replace(**changes)


def build_config(args, n, scenario=1, rho=None, shape2d=None):
    """Preset (or desk default), then config file, then flags."""
    if args.preset == "calibration":
        cfg = PRESETS["calibration"](n)
    elif args.preset == "recovery":
        cfg = PRESETS["recovery"](n, rho if rho is not None else 0.5, shape2d)
    else:
        cfg = bench.default_config(scenario, n, rho if rho is not None else 0.5)
    if args.config:
        cfg = read_config(args.config, cfg)
    return _apply_flags(cfg, args, n, rho)


def _synthetic_instance(args):
    scenario = SCENARIOS.get(str(args.scenario).lower())
    if scenario is None:
        raise CLIError(f"unknown scenario {args.scenario!r}")
    n = args.n
    m = args.m if args.m is not None else int(round(args.delta * n))
    seed = args.seed
    snr = float("inf") if args.snr is None else args.snr
    if scenario == 1:
        matrix = gen_matrix(BINARY01, m, n, bench.derive_seed(seed, 0), args.density)
        signal = gen_signal(DENSE_COMPLEX, n, args.rho, bench.derive_seed(seed, 1))
        rho = args.rho
    else:
        k = args.k if args.k is not None else max(1, int(round(args.rho * n)))
        matrix = gen_matrix(COMPLEX_GAUSSIAN, m, n, bench.derive_seed(seed, 0))
        signal = gen_signal(BINARY, n, k, bench.derive_seed(seed, 1))
        rho = k / n
    instance = synthesize(matrix, signal, snr, bench.derive_seed(seed, 2))
    return instance, scenario, rho


def _file_instance(args):
    if not args.matrix or not args.measurements:
        raise CLIError("give --matrix and --measurements, or --synthetic")
    matrix = read_matrix(args.matrix)
    y = read_measurements(args.measurements, intensity=args.intensity)
    truth = read_signal(args.truth) if args.truth else None
    instance = ProblemInstance(matrix, y, args.noise_var, truth)
    problems = validate(instance)
    if problems:
        raise CLIError("invalid problem: " + "; ".join(problems))
    scenario = 2 if args.prior == "binary" else 1
    return instance, scenario, args.rho if args.prior == "binary" else None


def cmd_solve(args, out=print):
    _resolve_seed(args, out)
    if args.synthetic:
        instance, scenario, rho = _synthetic_instance(args)
    else:
        instance, scenario, rho = _file_instance(args)
    shape2d = instance.ground_truth.shape2d if instance.ground_truth is not None else None
    config = build_config(args, instance.n, scenario, rho, shape2d)
    if args.x0:
        x0 = read_signal(args.x0)
        config = config.replace(x0=x0.values)
        shape2d = shape2d or x0.shape2d
    estimate, records = solve_with_restarts(instance, config, shape2d)
    best = min(records, key=lambda r: r.nr)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_signal(os.path.join(args.out, "estimate.csv"), estimate)
        write_record(os.path.join(args.out, "record.txt"), best)
        atomic_write_text(os.path.join(args.out, "config.txt"), format_config(config))
    summary = [f"nr={best.nr:.6g}", f"iterations={best.iterations_used}",
               f"converged={int(best.converged)}", f"seed={best.seed}"]
    if best.nmse is not None:
        summary.append(f"nmse={best.nmse:.6g}")
        if not np.iscomplexobj(instance.matrix.entries) or np.all(instance.matrix.entries.imag == 0):
            # a real matrix cannot tell x from conj(x)
            conj = nmse_phase_aligned(instance.ground_truth.values, np.conj(estimate.values))
            summary.append(f"nmse_conj={conj:.6g}")
    if best.correlation is not None:
        summary.append(f"correlation={best.correlation:.6g}")
    out(" ".join(summary))
    return EXIT_OK if best.converged else EXIT_NOT_CONVERGED


def cmd_preset(args, out=print):
    n = args.n
    rho = args.rho if args.rho is not None else 0.5
    shape2d = tuple(int(d) for d in args.shape2d.split("x")) if args.shape2d else None
    if args.name == "calibration":
        cfg = PRESETS["calibration"](n)
    else:
        cfg = PRESETS["recovery"](n, rho, shape2d)
    if args.config:
        cfg = read_config(args.config, cfg)
    cfg = _apply_flags(cfg, args, n, rho)
    out(format_config(cfg), end="")
    return EXIT_OK


def _grid_axes(args, scenario):
    gd, gr = (int(t) for t in args.grid.lower().split("x"))
    if args.deltas:
        deltas = _floats(args.deltas)
    else:
        top = 4.0 if scenario == 1 else 2.0
        deltas = [round(top * (k + 1) / gd, 6) for k in range(gd)]
    if args.rhos:
        rhos = _floats(args.rhos)
    else:
        top = 1.0 if scenario == 1 else 0.5
        rhos = [round(top * (k + 1) / gr, 6) for k in range(gr)]
    return deltas, rhos


def _bench_config(args, scenario, n):
    if args.preset or args.config or any(
            getattr(args, f, None) is not None
            for f in ("alpha", "alpha2d", "tmax", "epsilon", "v0", "xv0", "restarts",
                      "prior", "channel")):
        return build_config(args, n, scenario)
    return None


def cmd_bench(args, out=print):
    _resolve_seed(args, out)
    n = 256 if args.paper_scale and args.n is None else (args.n or 64)
    trials = 50 if args.paper_scale and args.trials is None else (args.trials or 10)
    if args.kind == "pt":
        scenario = SCENARIOS.get(str(args.scenario).lower())
        if scenario is None:
            raise CLIError(f"unknown scenario {args.scenario!r}")
        deltas, rhos = _grid_axes(args, scenario)
        snr = 30.0 if args.snr is None else _floats(args.snr)[0]
        spec = bench.GridSpec(n, deltas, rhos, trials, snr, scenario, master_seed=args.seed)
        cells = bench.run_grid(spec, _bench_config(args, scenario, n)).cells
    else:
        snrs = _floats(args.snr) if args.snr else [30.0, 20.0, 10.0, 5.0]
        deltas = _floats(args.deltas) if args.deltas else [0.5, 1.0, 2.0, 3.0, 4.0]
        cells = bench.run_noise_sweep(n, deltas, snrs, trials,
                                      _bench_config(args, 1, n), args.seed)
    if args.out:
        bench.emit_csv(cells, args.out, timings=args.timings)
        out(f"wrote {len(cells)} rows to {args.out}")
    else:
        out(bench.format_csv(cells, args.timings), end="")
    return EXIT_OK


def cmd_selftest(args, out=print):
    from .selftest import run_selftest

    ok = run_selftest(perturb_bessel=args.perturb_bessel, out=out)
    return EXIT_OK if ok else EXIT_ERROR


def build_parser():
    parser = argparse.ArgumentParser(prog="prsamp", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one problem instance")
    p.add_argument("--synthetic", action="store_true")
    p.add_argument("--scenario", default="calib")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--m", type=int)
    p.add_argument("--delta", type=float, default=4.0, help="sampling factor M/N")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--k", type=int)
    p.add_argument("--snr", type=float, help="dB; omitted means noiseless")
    p.add_argument("--density", type=float, default=0.5, help="binary matrix P(1)")
    p.add_argument("--matrix")
    p.add_argument("--measurements")
    p.add_argument("--truth")
    p.add_argument("--x0", help="initial estimate (signal file)")
    p.add_argument("--noise-var", type=float, default=0.0)
    p.add_argument("--intensity", action="store_true", help="measurements are |.|^2")
    p.add_argument("--out")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("preset", help="print a preset configuration")
    p.add_argument("name", choices=sorted(PRESETS))
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--rho", type=float)
    p.add_argument("--shape2d", help="ROWSxCOLS for image unknowns")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("bench", help="phase-transition grid or noise sweep")
    p.add_argument("kind", choices=["pt", "noise"])
    p.add_argument("--scenario", default="1")
    p.add_argument("--n", type=int)
    p.add_argument("--grid", default="8x8", help="DELTASxRHOS")
    p.add_argument("--deltas")
    p.add_argument("--rhos")
    p.add_argument("--trials", type=int)
    p.add_argument("--snr", help="dB, comma separated for noise sweeps")
    p.add_argument("--paper-scale", "--full-scale", dest="paper_scale", action="store_true",
                   help="N=256, 50 trials")
    p.add_argument("--timings", action="store_true", help="fill the wall_s column")
    p.add_argument("--out")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("selftest", help="oracle and invariant checks")
    p.add_argument("--perturb-bessel", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CLIError, FileFormatError, OSError, ValueError) as exc:
        print(f"prsamp: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
