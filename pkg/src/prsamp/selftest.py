"""Installation checks: oracle agreement, solver invariants, tiny recovery."""

import time

import numpy as np
from scipy.special import i0e, i1e

from .channels import bessel_ratio, binary_denoise, gaussian_denoise, rician_channel
from .model import BINARY01, COMPLEX_GAUSSIAN, BinaryPrior, GaussianPrior
from .oracles import channel_oracle, denoiser_oracle
from .solver import (
    _Problem,
    calibration_config,
    field_residual,
    initialize,
    output_step,
    solve_once,
    solve_with_restarts,
    sweep,
)
from .synth import DENSE_COMPLEX, gen_matrix, gen_signal, nmse_phase_aligned, synthesize


def check_bessel(perturb=0.0):
    kappa = np.concatenate([[0.0], np.logspace(-6, 3, 400), [1e4, 1e6]])
    got = bessel_ratio(kappa) + perturb
    ref = i1e(kappa) / i0e(kappa)
    err = np.max(np.abs(got - ref) / np.maximum(ref, 1e-300))
    return err < 1e-10, f"max rel err {err:.2e}"


def check_denoisers(draws=200, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        r = complex(*rng.uniform(-2, 2, 2))
        s = float(np.exp(rng.uniform(np.log(0.05), np.log(5))))
        m = complex(*rng.uniform(-2, 2, 2))
        sigma = float(np.exp(rng.uniform(np.log(0.05), np.log(5))))
        rho = float(rng.uniform(0.05, 0.95))
        for closed, prior in (
            (gaussian_denoise(r, s, m, sigma), GaussianPrior(m, sigma)),
            (binary_denoise(r, s, rho), BinaryPrior(rho)),
        ):
            ref = denoiser_oracle(prior, r, s)
            worst = max(
                worst,
                abs(closed.mean - ref.mean) / max(abs(ref.mean), 1e-3),
                abs(closed.variance - ref.variance) / max(ref.variance, 1e-12),
            )
    return worst < 1e-8, f"max rel err {worst:.2e}"


def check_rician(draws=200, seed=1):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(draws):
        y = float(rng.uniform(0, 3))
        omega = complex(*rng.uniform(-2, 2, 2))
        v = float(np.exp(rng.uniform(np.log(0.1), np.log(2))))
        delta = 0.0 if k % 5 == 0 else float(np.exp(rng.uniform(np.log(0.01), np.log(1))))
        closed = rician_channel(y, omega, v, delta)
        ref = channel_oracle(y, omega, v, delta, 256)
        worst = max(worst, abs(closed.g - ref.g) / max(1, abs(ref.g)),
                    abs(closed.dg - ref.dg) / max(1, abs(ref.dg)))
    return worst < 1e-6, f"max err {worst:.2e}"


def _small_problem(seed=3, n=24, kind=BINARY01):
    matrix = gen_matrix(kind, 4 * n, n, seed)
    signal = gen_signal(DENSE_COMPLEX, n, 1.0, seed + 1)
    return synthesize(matrix, signal, 30.0, seed + 2)


def check_invariants(iterations=15):
    instance = _small_problem()
    config = calibration_config(instance.n, alpha=0.95, xv0=1.0, seed=5)
    prob = _Problem(instance, config)
    rng = np.random.default_rng(config.seed)
    state = initialize(prob, config, rng)
    worst_field = 0.0
    low = np.inf
    for _ in range(iterations):
        output_step(state, prob, config)
        sweep(state, prob, config, rng)
        worst_field = max(worst_field, field_residual(state, prob))
        low = min(low, state.x_v.min(), state.v.min(), state.s.min())
    ok_field = worst_field < 1e-6
    ok_pos = low >= config.clamp_vmin
    return ok_field, ok_pos, f"field {worst_field:.2e}", f"min variance {low:.2e}"


def check_determinism():
    instance = _small_problem(seed=7, n=16)
    config = calibration_config(instance.n, t_max=20, seed=11)
    a, ra = solve_once(instance, config)
    b, rb = solve_once(instance, config)
    same = (np.array_equal(a.values, b.values) and ra.nr == rb.nr
            and ra.iterations_used == rb.iterations_used)
    return same, f"nr {ra.nr:.3e}"


def check_phase_invariance(trials=100, seed=2):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    worst = max(nmse_phase_aligned(x, np.exp(1j * phi) * x)
                for phi in rng.uniform(0, 2 * np.pi, trials))
    return worst < 1e-12, f"max nmse {worst:.1e}"


def check_recovery():
    instance = _small_problem(seed=21, n=32, kind=COMPLEX_GAUSSIAN)
    config = calibration_config(instance.n, alpha=0.5, xv0=1.0, t_max=200, restarts=3, seed=1)
    estimate, records = solve_with_restarts(instance, config)
    nmse = nmse_phase_aligned(instance.ground_truth.values, estimate.values)
    return nmse < 1e-2, f"nmse {nmse:.2e}"


def run_selftest(perturb_bessel=0.0, out=print):
    start = time.perf_counter()
    results = []
    results.append(("bessel ratio vs scipy",) + check_bessel(perturb_bessel))
    results.append(("denoisers vs quadrature",) + check_denoisers())
    results.append(("rician channel vs quadrature",) + check_rician())
    ok_field, ok_pos, msg_field, msg_pos = check_invariants()
    results.append(("field consistency", ok_field, msg_field))
    results.append(("positivity clamps", ok_pos, msg_pos))
    results.append(("determinism",) + check_determinism())
    results.append(("phase-aligned nmse invariance",) + check_phase_invariance())
    results.append(("end-to-end recovery",) + check_recovery())
    width = max(len(name) for name, _, _ in results)
    for name, ok, detail in results:
        out(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    elapsed = time.perf_counter() - start
    out(f"selftest finished in {elapsed:.1f} s")
    return all(ok for _, ok, _ in results)
