"""Input denoisers and output channels.

The swept solver calls scalar ``numba`` kernels (the ``_*_scalar`` functions).
The Bessel ratio and the Rician channel wrappers run those kernels directly;
the denoisers and the AWGN channel are vectorised numpy twins, kept in step
with their kernels by the test suite.
Complex Gaussians follow the CN(m, s) convention, density ~ exp(-|z - m|^2 / s).
"""

import math
from typing import NamedTuple

import numba
import numpy as np

__all__ = [
    "DenoiserResult",
    "ChannelResult",
    "bessel_ratio",
    "gaussian_denoise",
    "binary_denoise",
    "rician_channel",
    "awgn_channel",
    "PRIOR_GAUSSIAN",
    "PRIOR_BINARY",
    "CHANNEL_RICIAN",
    "CHANNEL_AWGN",
]

PRIOR_GAUSSIAN = 0
PRIOR_BINARY = 1
CHANNEL_RICIAN = 0
CHANNEL_AWGN = 1

# power series below, full asymptotic series in the middle, 4 terms at the top
_SERIES_MAX = 20.0
_ASYMPTOTIC_4TERM_MIN = 500.0


class DenoiserResult(NamedTuple):
    mean: np.ndarray
    variance: np.ndarray


class ChannelResult(NamedTuple):
    g: np.ndarray
    dg: np.ndarray


@numba.njit(cache=True)
def _bessel_ratio_scalar(kappa):
    if kappa == 0.0:
        return 0.0
    if kappa < _SERIES_MAX:
        q = 0.25 * kappa * kappa
        t0 = 1.0
        t1 = 1.0
        s0 = 1.0
        s1 = 1.0
        for j in range(1, 400):
            t0 *= q / (j * j)
            t1 *= q / (j * (j + 1.0))
            s0 += t0
            s1 += t1
            if t0 < 1e-18 * s0:
                break
        return 0.5 * kappa * s1 / s0
    if kappa < _ASYMPTOTIC_4TERM_MIN:
        # Hankel expansions of exp(-x) sqrt(2 pi x) I_nu(x), nu = 0, 1
        a0 = 1.0
        a1 = 1.0
        t0 = 1.0
        t1 = 1.0
        for k in range(1, 60):
            odd2 = (2.0 * k - 1.0) ** 2
            n0 = t0 * odd2 / (8.0 * k * kappa)
            n1 = t1 * (odd2 - 4.0) / (8.0 * k * kappa)
            if abs(n0) > abs(t0) and k > 1:
                break
            t0 = n0
            t1 = n1
            a0 += t0
            a1 += t1
            if abs(t0) < 1e-18 and abs(t1) < 1e-18:
                break
        return a1 / a0
    u = 1.0 / kappa
    return 1.0 - u * (0.5 + u * (0.125 + u * (0.125 + u * (25.0 / 128.0))))


@numba.njit(cache=True)
def _bessel_ratio_array(kappa, out):
    for k in range(kappa.size):
        out[k] = _bessel_ratio_scalar(kappa[k])


@numba.njit(cache=True)
def _gaussian_scalar(r, s, m, sigma):
    denom = sigma + s
    return (sigma * r + s * m) / denom, sigma * s / denom


@numba.njit(cache=True)
def _binary_scalar(r, s, rho):
    # log-odds of x = 0 against x = 1; only Re(r) survives |r - 1|^2 - |r|^2
    log_odds = math.log((1.0 - rho) / rho) + (1.0 - 2.0 * r.real) / s
    if log_odds > 0.0:
        e = math.exp(-log_odds)
        p1 = e / (1.0 + e)
        p0 = 1.0 / (1.0 + e)
    else:
        e = math.exp(log_odds)
        p1 = 1.0 / (1.0 + e)
        p0 = e / (1.0 + e)
    return complex(p1, 0.0), p1 * p0


@numba.njit(cache=True)
def _denoise_scalar(code, r, s, m, p):
    if code == PRIOR_GAUSSIAN:
        return _gaussian_scalar(r, s, m, p)
    return _binary_scalar(r, s, p)


@numba.njit(cache=True)
def _rician_scalar(y, omega, v, delta):
    vt = v + delta
    mag = abs(omega)
    if y == 0.0 or mag == 0.0:
        u_hat = 0.0j
        var_t = y * y
    else:
        ratio = _bessel_ratio_scalar(2.0 * y * mag / vt)
        u_hat = (y * ratio / mag) * omega
        var_t = y * y * (1.0 - ratio * ratio)
    g = (u_hat - omega) / vt
    shrink = v / vt
    v_z = shrink * shrink * var_t + v * delta / vt
    dg = (v_z / v - 1.0) / v
    return g, dg


@numba.njit(cache=True)
def _awgn_scalar(y, omega, v, delta):
    vt = v + delta
    return (y - omega) / vt, -1.0 / vt


@numba.njit(cache=True)
def _channel_scalar(code, y, omega, v, delta):
    if code == CHANNEL_RICIAN:
        return _rician_scalar(y.real, omega, v, delta)
    return _awgn_scalar(y, omega, v, delta)


@numba.njit(cache=True)
def _rician_array(y, omega, v, delta, g, dg):
    for k in range(y.size):
        g[k], dg[k] = _rician_scalar(y[k], omega[k], v[k], delta[k])


def _flat(*args):
    arrays = np.broadcast_arrays(*[np.asarray(a) for a in args])
    return arrays[0].shape, [np.ascontiguousarray(a).ravel() for a in arrays]


def _unwrap(x, shape):
    x = x.reshape(shape)
    return x[()] if x.ndim == 0 else x


def bessel_ratio(kappa):
    """I1(kappa) / I0(kappa) without overflow, for any finite kappa >= 0."""
    shape, (k,) = _flat(kappa)
    k = k.astype(float)
    if not np.all(np.isfinite(k)) or np.any(k < 0):
        raise ValueError("bessel_ratio needs finite kappa >= 0")
    out = np.empty_like(k)
    _bessel_ratio_array(k, out)
    return _unwrap(out, shape)


def gaussian_denoise(r, s, m=0.0, sigma=1.0):
    """Posterior of x ~ CN(m, sigma) observed as r = x + CN(0, s)."""
    r, s, m, sigma = (np.asarray(a) for a in (r, s, m, sigma))
    if np.any(s <= 0) or np.any(sigma <= 0):
        raise ValueError("gaussian_denoise needs s > 0 and sigma > 0")
    denom = sigma + s
    return DenoiserResult((sigma * r + s * m) / denom, sigma * s / denom)


def binary_denoise(r, s, rho):
    """Posterior of x in {0, 1}, P(x = 1) = rho, observed as r = x + CN(0, s)."""
    r, s = np.asarray(r, dtype=complex), np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("binary_denoise needs s > 0")
    if not 0.0 < rho < 1.0:
        raise ValueError("binary_denoise needs 0 < rho < 1")
    log_odds = np.log((1.0 - rho) / rho) + (1.0 - 2.0 * r.real) / s
    p1 = _expit(-log_odds)
    p0 = _expit(log_odds)
    return DenoiserResult(p1, p1 * p0)


def _expit(x):
    # split by sign so exp never overflows
    x = np.asarray(x, dtype=float)
    e = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def rician_channel(y, omega, v, delta=0.0):
    """Score ``g`` and curvature ``dg`` for magnitude observations y = |z + w|.

    ``z ~ CN(omega, v)`` is the current belief about the noiseless projection
    and ``w ~ CN(0, delta)``.  ``dg`` may be positive: the magnitude likelihood
    is not log-concave.
    """
    shape, (y, omega, v, delta) = _flat(y, omega, v, delta)
    y = y.astype(float)
    v = v.astype(float)
    delta = delta.astype(float)
    omega = omega.astype(complex)
    if np.any(v <= 0):
        raise ValueError("rician_channel needs v > 0")
    if np.any(y < 0):
        raise ValueError("rician_channel needs y >= 0")
    if np.any(delta < 0):
        raise ValueError("rician_channel needs delta >= 0")
    g = np.empty(y.size, dtype=complex)
    dg = np.empty(y.size)
    _rician_array(y, omega, v, delta, g, dg)
    return ChannelResult(_unwrap(g, shape), _unwrap(dg, shape))


def awgn_channel(y, omega, v, delta=0.0):
    """Linear Gaussian output channel y = z + CN(0, delta)."""
    y, omega, v, delta = (np.asarray(a) for a in (y, omega, v, delta))
    vt = v + delta
    if np.any(v <= 0) or np.any(vt <= 0):
        raise ValueError("awgn_channel needs v > 0 and v + delta > 0")
    g = (y - omega) / vt
    return ChannelResult(g, np.broadcast_to(-1.0 / vt, np.shape(g)))
