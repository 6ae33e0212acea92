"""prSAMP: swept approximate message passing for phase retrieval.

One iteration is

1. ``output_step``: output fields ``omega``, ``v`` (with the Onsager term) and
   the channel scores ``g``, ``dg`` for every measurement;
2. ``sweep``: a random-order pass over the input coordinates, each one
   refreshing its Gaussian field ``(r, s)``, its posterior ``(x_a, x_v)``
   and, incrementally, the output fields of the rows it touches;
3. ``median_damp_2d`` when the unknown is an image.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numba
import numpy as np
from scipy import ndimage

from .channels import _channel_scalar, _denoise_scalar
from .model import (
    BinaryPrior,
    ChannelSpec,
    ComplexSignal,
    GaussianPrior,
    SolverConfig,
    SolverState,
    TrialRecord,
)
from .synth import correlation, nmse_phase_aligned, normalized_residual

MEDIAN_BLOCK = 5


@dataclass
class SweepStats:
    order: np.ndarray
    clamps: int
    max_step: float


def default_t_max(n):
    return n if n < 256 else max(n // 4, 64)


def calibration_config(n, **overrides):
    """Complex unknown behind a binary matrix: Gaussian prior, heavy damping."""
    cfg = SolverConfig(
        alpha=0.9,
        t_max=default_t_max(n),
        input_prior=GaussianPrior(0.0, 1.0),
        x0="random",
        xv0=0.5,
    )
    return cfg.replace(**overrides)


def recovery_config(n, rho, shape2d=None, **overrides):
    """Binary unknown behind a complex matrix: binary prior, light damping."""
    cfg = SolverConfig(
        alpha=0.2,
        alpha2d=0.5 if shape2d is not None else 0.0,
        t_max=default_t_max(n),
        input_prior=BinaryPrior(rho),
        x0="constant",
        x0_value=rho,
        xv0=0.1,
    )
    return cfg.replace(**overrides)


PRESETS = {"calibration": calibration_config, "recovery": recovery_config}


@numba.njit(cache=True)
def _clamp(value, vmin, v0):
    # returns (clamped value, 1 if it was replaced)
    if not (value > 0.0) or not np.isfinite(value):
        return v0, 1
    if value < vmin:
        return vmin, 1
    return value, 0


@numba.njit(cache=True)
def _clamp_array(values, vmin, v0):
    count = 0
    for k in range(values.size):
        values[k], c = _clamp(values[k], vmin, v0)
        count += c
    return count


@numba.njit(cache=True)
def _channel_array(code, y, omega, v, delta, g, dg):
    for mu in range(y.size):
        g[mu], dg[mu] = _channel_scalar(code, y[mu], omega[mu], v[mu], delta)


@numba.njit(cache=True)
def _sweep_kernel(order, ht, h2t, y, delta, channel, prior, prior_m, prior_p,
                  alpha, v0, vmin, x_a, x_v, omega, v, g, dg, g_prev, r, s):
    m = y.size
    clamps = 0
    max_step = 0.0
    for i in order:
        col = ht[i]
        col2 = h2t[i]
        precision = 0.0
        field = 0.0j
        for mu in range(m):
            h2 = col2[mu]
            if h2 != 0.0:
                precision -= h2 * dg[mu]
                field += np.conj(col[mu]) * g[mu]
        if precision > 0.0 and np.isfinite(precision):
            s_new, c = _clamp(1.0 / precision, vmin, v0)
        else:
            s_new, c = v0, 1
        clamps += c
        r_new = x_a[i] + s_new * field
        s[i] = alpha * s[i] + (1.0 - alpha) * s_new
        r[i] = alpha * r[i] + (1.0 - alpha) * r_new

        a_new, v_new = _denoise_scalar(prior, r[i], s[i], prior_m, prior_p)
        v_new, c = _clamp(v_new, vmin, v0)
        clamps += c
        da = a_new - x_a[i]
        dv = v_new - x_v[i]
        if da != 0.0 or dv != 0.0:
            for mu in range(m):
                h2 = col2[mu]
                if h2 != 0.0:
                    v_old = v[mu]
                    v_mu, c = _clamp(v_old + h2 * dv, vmin, v0)
                    clamps += c
                    v[mu] = v_mu
                    omega[mu] += col[mu] * da - g_prev[mu] * (v_mu - v_old)
                    g[mu], dg[mu] = _channel_scalar(channel, y[mu], omega[mu], v_mu, delta)
        step = abs(da)
        if step > max_step:
            max_step = step
        x_a[i] = a_new
        x_v[i] = v_new
    return clamps, max_step


class _Problem:
    """Solver-side view of an instance: contiguous arrays and resolved noise."""

    def __init__(self, instance, config):
        self.h = instance.matrix.entries
        self.h2 = instance.matrix.abs2
        self.ht = np.ascontiguousarray(self.h.T)
        self.h2t = np.ascontiguousarray(self.h2.T)
        self.y = instance.y.astype(complex)
        channel = config.output_channel
        self.delta = float(instance.delta if channel.delta is None else channel.delta)
        self.channel = channel.code


def _problem(instance, config):
    # tests and the CLI call the step functions with a bare instance
    return instance if isinstance(instance, _Problem) else _Problem(instance, config)


def initialize(instance, config, rng=None):
    """Fresh state: ``x_a`` from ``config.x0``, ``x_v = xv0``, no score memory."""
    prob = _problem(instance, config)
    n = prob.h.shape[1]
    m = prob.h.shape[0]
    if rng is None:
        rng = np.random.default_rng(config.seed)
    if isinstance(config.x0, str) and config.x0 == "random":
        prior = config.input_prior
        if isinstance(prior, GaussianPrior):
            x_a = prior.mean + np.sqrt(prior.sigma / 2) * (
                rng.standard_normal(n) + 1j * rng.standard_normal(n))
        else:
            x_a = rng.random(n).astype(complex)
    elif isinstance(config.x0, str):
        x_a = np.full(n, complex(config.x0_value))
    else:
        x_a = np.asarray(config.x0, dtype=complex).ravel().copy()
        if x_a.size != n:
            raise ValueError(f"x0 has length {x_a.size}, expected {n}")
    x_v = np.full(n, float(config.xv0))
    zeros_m = np.zeros(m, dtype=complex)
    return SolverState(
        x_a=x_a,
        x_v=x_v,
        omega=prob.h @ x_a,
        v=prob.h2 @ x_v,
        g=zeros_m,
        dg=np.zeros(m),
        g_prev=zeros_m.copy(),
        r=x_a.copy(),
        s=x_v.copy(),
    )


def output_step(state, instance, config):
    """Recompute ``v``, ``omega`` and the channel scores from scratch.

    ``omega = H x_a - v * g`` where ``g`` is the score left by the previous
    iteration; that score is kept as ``state.g_prev`` for the sweep.
    Returns the number of variance clamps.
    """
    prob = _problem(instance, config)
    v = prob.h2 @ state.x_v
    clamps = _clamp_array(v, config.clamp_vmin, config.resolved_v0())
    state.g_prev = state.g.copy()
    state.v = v
    state.omega = prob.h @ state.x_a - v * state.g_prev
    g = np.empty_like(state.g)
    dg = np.empty_like(state.dg)
    _channel_array(prob.channel, prob.y, state.omega, v, prob.delta, g, dg)
    if config.damp_output and state.t > 0:
        g = config.alpha * state.g + (1 - config.alpha) * g
        dg = config.alpha * state.dg + (1 - config.alpha) * dg
    state.g = g
    state.dg = dg
    return clamps


def sweep(state, instance, config, rng):
    prob = _problem(instance, config)
    order = rng.permutation(state.x_a.size)
    prior = config.input_prior
    prior_m, prior_p = prior.params
    clamps, max_step = _sweep_kernel(
        order, prob.ht, prob.h2t, prob.y, prob.delta, prob.channel, prior.code,
        prior_m, prior_p, config.alpha, config.resolved_v0(), config.clamp_vmin,
        state.x_a, state.x_v, state.omega, state.v, state.g, state.dg,
        state.g_prev, state.r, state.s,
    )
    return SweepStats(order, int(clamps), float(max_step))


def _nan_median(window):
    return np.median(window[~np.isnan(window)])


def median_damp_2d(state, config, shape2d):
    """Pull the real part of each pixel towards its 5x5 neighbourhood median
    (blocks truncated at the image border)."""
    if config.alpha2d == 0:
        return
    if shape2d is None:
        raise ValueError("alpha2d > 0 needs a 2D signal shape")
    re = state.x_a.real.reshape(shape2d)
    local = ndimage.generic_filter(
        re, _nan_median, size=MEDIAN_BLOCK, mode="constant", cval=np.nan)
    mixed = (1 - config.alpha2d) * re + config.alpha2d * local
    state.x_a = mixed.ravel() + 1j * state.x_a.imag


def field_residual(state, instance):
    """Relative mismatch between the maintained ``omega`` and a from-scratch
    ``H x_a - v * g_prev``."""
    h = instance.matrix.entries if not isinstance(instance, _Problem) else instance.h
    fresh = h @ state.x_a - state.v * state.g_prev
    scale = max(np.linalg.norm(fresh), 1e-300)
    return float(np.linalg.norm(state.omega - fresh) / scale)


def solve_once(instance, config, seed=None, shape2d=None, callback=None):
    """Run prSAMP from one initialisation.

    Returns the estimate and a ``TrialRecord``.  ``callback(state, stats)`` is
    invoked after every iteration.
    """
    seed = config.seed if seed is None else seed
    if shape2d is None and instance.ground_truth is not None:
        shape2d = instance.ground_truth.shape2d
    if config.alpha2d > 0 and shape2d is None:
        raise ValueError("alpha2d > 0 needs a 2D signal shape")
    start = time.perf_counter()
    prob = _Problem(instance, config)
    rng = np.random.default_rng(seed)
    state = initialize(prob, config, rng)
    epsilon = config.resolved_epsilon(state.x_a.size)
    converged = False
    for t in range(1, config.t_max + 1):
        previous = state.x_a.copy()
        output_step(state, prob, config)
        stats = sweep(state, prob, config, rng)
        median_damp_2d(state, config, shape2d)
        state.t = t
        if callback is not None:
            callback(state, stats)
        change = np.sum(np.abs(state.x_a - previous) ** 2)
        if change < epsilon:
            converged = True
            break
    x_hat = state.x_a
    record = TrialRecord(
        config=config.summary(),
        converged=converged,
        iterations_used=state.t,
        nr=normalized_residual(instance, x_hat),
        seed=int(seed),
        wall_time=time.perf_counter() - start,
    )
    truth = instance.ground_truth
    if truth is not None and np.any(truth.values != 0):
        record.nmse = nmse_phase_aligned(truth.values, x_hat)
        if np.all(truth.values.imag == 0) and np.ptp(truth.values.real) > 0:
            record.correlation = correlation(truth.values, x_hat)
    return ComplexSignal(x_hat.copy(), shape2d), record


def solve_with_restarts(instance, config, shape2d=None):
    """Best-of-``restarts`` runs by normalized residual (lowest seed on ties)."""
    best = None
    records = []
    for k in range(config.restarts):
        seed = (config.seed + k) % 2**64
        estimate, record = solve_once(instance, config, seed, shape2d)
        records.append(record)
        if best is None or record.nr < best[1].nr:
            best = (estimate, record)
    return best[0], records
