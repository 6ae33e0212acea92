"""Brute-force posterior moments used to check the closed-form channels.

Nothing here calls into :mod:`prsamp.channels`; the Rice density uses
``scipy.special.i0e`` and every moment is a plain weighted sum.
"""

from typing import NamedTuple

import numpy as np
from scipy.special import i0e, logsumexp, ndtr

from .channels import DenoiserResult
from .model import BinaryPrior, GaussianPrior


class OracleError(RuntimeError):
    pass


class ChannelEstimate(NamedTuple):
    g: complex
    dg: float
    g_se: float = 0.0
    dg_se: float = 0.0


def _weighted_moments(logw, z):
    w = np.exp(logw - logsumexp(logw))
    mean = np.sum(w * z)
    var = np.sum(w * np.abs(z - mean) ** 2)
    return mean, var


def denoiser_oracle(prior, r, s, points_per_sd=4.0, width_sd=9.0):
    """Posterior mean and variance of x given r = x + CN(0, s).

    Gaussian prior: trapezoid rule on a uniform square grid over the complex
    plane covering both the observation and the prior mean.  Binary prior:
    exact two-point sum.
    """
    if not s > 0:
        raise ValueError("denoiser_oracle needs s > 0")
    r = complex(r)
    if isinstance(prior, BinaryPrior):
        log_w = np.array([
            np.log1p(-prior.rho) - abs(r) ** 2 / s,
            np.log(prior.rho) - abs(r - 1.0) ** 2 / s,
        ])
        p = np.exp(log_w - logsumexp(log_w))
        return DenoiserResult(complex(p[1]), float(p[0] * p[1]))
    if not isinstance(prior, GaussianPrior):
        raise TypeError(f"unsupported prior {prior!r}")

    m, sigma = complex(prior.mean), float(prior.sigma)
    narrow = np.sqrt(min(s, sigma) / 2)  # per-axis sd of the narrower factor
    wide = np.sqrt(max(s, sigma) / 2)
    h = narrow / points_per_sd
    axes = []
    for a, b in ((r.real, m.real), (r.imag, m.imag)):
        lo, hi = min(a, b) - width_sd * wide, max(a, b) + width_sd * wide
        axes.append(np.arange(lo, hi + h, h))
    xr, xi = np.meshgrid(*axes, indexing="ij")
    x = xr + 1j * xi
    logw = -np.abs(x - r) ** 2 / s - np.abs(x - m) ** 2 / sigma
    edge = max(logw[0].max(), logw[-1].max(), logw[:, 0].max(), logw[:, -1].max())
    if edge > logw.max() - 60:
        raise OracleError("quadrature window does not contain the posterior")
    mean, var = _weighted_moments(logw.ravel(), x.ravel())
    return DenoiserResult(mean, float(var))


def _to_channel(z_mean, z_var, omega, v):
    return (z_mean - omega) / v, (z_var / v - 1.0) / v


def _log_rice(y, rho, delta):
    if y == 0:
        # y -> 0 limit, up to a constant
        return -np.asarray(rho) ** 2 / delta
    arg = 2.0 * y * rho / delta
    return np.log(2.0 * y / delta) - (y - rho) ** 2 / delta + np.log(i0e(arg))


def channel_oracle(y, omega, v, delta, n_samples=20000, method="quadrature", rng=None):
    """Posterior moments of z ~ CN(omega, v) given the magnitude y = |z + w|.

    ``method="quadrature"`` integrates on a polar grid (on the circle |z| = y
    when delta = 0); ``"montecarlo"`` uses importance sampling and reports
    standard errors.  ``n_samples`` sets the angular resolution for
    quadrature and the draw count for Monte Carlo.
    """
    if not v > 0:
        raise ValueError("channel_oracle needs v > 0")
    if y < 0 or delta < 0:
        raise ValueError("channel_oracle needs y >= 0 and delta >= 0")
    omega = complex(omega)
    if method == "quadrature":
        z_mean, z_var = _polar_quadrature(y, omega, v, delta, n_samples)
        g, dg = _to_channel(z_mean, z_var, omega, v)
        return ChannelEstimate(complex(g), float(dg))
    if method == "montecarlo":
        return _importance_sampling(y, omega, v, delta, n_samples, rng)
    raise ValueError(f"unknown method {method!r}")


def _polar_quadrature(y, omega, v, delta, n_theta):
    n_theta = min(int(n_theta), 4096)
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    if y == 0 and delta == 0:
        return 0.0j, 0.0
    if delta == 0:
        z = y * np.exp(1j * theta)
        logw = -np.abs(z - omega) ** 2 / v
        return _weighted_moments(logw, z)

    sd = np.sqrt(max(v, delta))
    lo = max(0.0, min(y, abs(omega)) - 12 * sd)
    lo = 1e-12 if lo == 0 else lo
    hi = max(y, abs(omega)) + 12 * sd
    panel = np.sqrt(min(v, delta)) / 3
    n_panels = int(np.ceil((hi - lo) / panel))
    nodes, weights = np.polynomial.legendre.leggauss(8)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    rho = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w_rho = (half[:, None] * weights[None, :]).ravel()

    z = rho[:, None] * np.exp(1j * theta)[None, :]
    logw = (
        np.log(w_rho * rho)[:, None]
        + _log_rice(y, rho, delta)[:, None]
        - np.abs(z - omega) ** 2 / v
    )
    return _weighted_moments(logw.ravel(), z.ravel())


def _importance_sampling(y, omega, v, delta, n, rng):
    rng = np.random.default_rng(rng)
    if delta == 0:
        # proposal: uniform phase on the circle |z| = y
        z = y * np.exp(2j * np.pi * rng.random(n))
        logw = -np.abs(z - omega) ** 2 / v
    else:
        # Defensive mixture proposal: about half from the prior CN(omega, v), half
        # from a ring |z| ~ N(y, width^2) (truncated at 0) with uniform phase.
        # The prior alone degenerates when delta << v: the Rice likelihood
        # then pins |z| to a thin ring the prior rarely hits.
        width = 1.5 * np.sqrt((v + delta) / 2)
        n_prior = n // 2
        z_prior = omega + np.sqrt(v / 2) * (
            rng.standard_normal(n_prior) + 1j * rng.standard_normal(n_prior))
        radius = y + width * rng.standard_normal(4 * (n - n_prior))
        radius = radius[radius > 0][: n - n_prior]
        z_ring = radius * np.exp(2j * np.pi * rng.random(radius.size))
        z = np.concatenate([z_prior, z_ring])
        rho = np.abs(z)
        log_prior = -np.log(np.pi * v) - np.abs(z - omega) ** 2 / v
        log_ring = (-0.5 * ((rho - y) / width) ** 2 - np.log(width * np.sqrt(2 * np.pi))
                    - np.log(ndtr(y / width)) - np.log(2 * np.pi * np.maximum(rho, 1e-300)))
        # deterministic-mixture weights use the realised split
        log_q = np.logaddexp(log_prior + np.log(n_prior / z.size),
                             log_ring + np.log(z_ring.size / z.size))
        logw = log_prior + _log_rice(y, rho, delta) - log_q
    w = np.exp(logw - logsumexp(logw))
    z_mean = np.sum(w * z)
    second = np.abs(z - z_mean) ** 2
    z_var = np.sum(w * second)
    # delta-method standard errors of self-normalised estimators
    mean_se = np.sqrt(np.sum(w**2 * second))
    var_se = np.sqrt(np.sum(w**2 * (second - z_var) ** 2))
    g, dg = _to_channel(z_mean, z_var, omega, v)
    return ChannelEstimate(complex(g), float(dg), float(mean_se / v), float(var_se / v**2))
