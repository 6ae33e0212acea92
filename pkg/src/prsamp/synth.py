"""Synthetic problems and recovery metrics."""

import numpy as np

from .model import (
    BINARY01,
    COMPLEX_GAUSSIAN,
    ComplexSignal,
    MeasurementMatrix,
    ProblemInstance,
)

DENSE_COMPLEX = "dense_complex"
BINARY = "binary"


def gen_matrix(kind, m, n, seed, density=0.5):
    """Binary 0/1 entries with P(1) = ``density``, or i.i.d. CN(0, 1/n)."""
    if m < 1 or n < 1:
        raise ValueError("matrix dimensions must be positive")
    rng = np.random.default_rng(seed)
    if kind == BINARY01:
        h = (rng.random((m, n)) < density).astype(float)
    elif kind == COMPLEX_GAUSSIAN:
        h = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2 * n)
    else:
        raise ValueError(f"unknown matrix kind {kind!r}")
    return MeasurementMatrix(h, kind)


def gen_signal(kind, n, rho_or_k, seed, shape2d=None):
    """Dense complex CN(0, 1) signal with a fraction ``rho`` of nonzeros, or a
    binary signal with exactly ``k`` ones."""
    rng = np.random.default_rng(seed)
    if kind == DENSE_COMPLEX:
        rho = float(rho_or_k)
        if not 0 < rho <= 1:
            raise ValueError("rho must lie in (0, 1]")
        x = np.zeros(n, dtype=complex)
        support = rng.permutation(n)[: max(1, int(round(rho * n)))]
        x[support] = (rng.standard_normal(support.size)
                      + 1j * rng.standard_normal(support.size)) / np.sqrt(2)
    elif kind == BINARY:
        k = int(rho_or_k)
        if not 0 < k <= n:
            raise ValueError("need 0 < K <= N")
        x = np.zeros(n, dtype=complex)
        x[rng.permutation(n)[:k]] = 1.0
    else:
        raise ValueError(f"unknown signal kind {kind!r}")
    return ComplexSignal(x, shape2d)


def snr_to_delta(signal_power, snr_db):
    if np.isinf(snr_db) and snr_db > 0:
        return 0.0
    return float(signal_power) * 10.0 ** (-snr_db / 10.0)


def synthesize(matrix, x, snr_db, seed):
    """Noisy magnitudes ``y = |H x + w|`` at the requested SNR.

    The noise variance is set relative to the mean measured power E|z|^2, so
    unit-power projections at 30 dB give delta = 1e-3.
    """
    signal = x if isinstance(x, ComplexSignal) else ComplexSignal(x)
    if matrix.shape[1] != signal.n:
        raise ValueError(f"matrix has {matrix.shape[1]} columns, signal has {signal.n} entries")
    rng = np.random.default_rng(seed)
    z = matrix.entries @ signal.values
    delta = snr_to_delta(np.mean(np.abs(z) ** 2), snr_db)
    w = np.sqrt(delta / 2) * (rng.standard_normal(z.size) + 1j * rng.standard_normal(z.size))
    return ProblemInstance(matrix, np.abs(z + w), delta, signal)


def synthesize_linear(matrix, x, snr_db, seed):
    """Complex observations ``y = H x + w`` for the AWGN channel."""
    signal = x if isinstance(x, ComplexSignal) else ComplexSignal(x)
    if matrix.shape[1] != signal.n:
        raise ValueError(f"matrix has {matrix.shape[1]} columns, signal has {signal.n} entries")
    rng = np.random.default_rng(seed)
    z = matrix.entries @ signal.values
    delta = snr_to_delta(np.mean(np.abs(z) ** 2), snr_db)
    w = np.sqrt(delta / 2) * (rng.standard_normal(z.size) + 1j * rng.standard_normal(z.size))
    return ProblemInstance(matrix, z + w, delta, signal)


def normalized_residual(instance, x_hat):
    """||y - |H x_hat|||^2 / ||y||^2 (no magnitude for linear instances)."""
    y = instance.y
    z = instance.matrix.entries @ x_hat
    fit = z if instance.linear else np.abs(z)
    return float(np.sum(np.abs(y - fit) ** 2) / np.sum(np.abs(y) ** 2))


def nmse_phase_aligned(x_true, x_hat):
    """NMSE after rotating ``x_hat`` by the best global phase."""
    x_true = np.asarray(x_true, dtype=complex)
    x_hat = np.asarray(x_hat, dtype=complex)
    if x_true.shape != x_hat.shape:
        raise ValueError("length mismatch")
    energy = np.sum(np.abs(x_true) ** 2)
    if energy == 0:
        raise ValueError("x_true must be nonzero")
    c = np.vdot(x_hat, x_true)
    phase = c / abs(c) if c != 0 else 1.0
    return float(np.sum(np.abs(x_true - phase * x_hat) ** 2) / energy)


def signed_correlation(x_true, x_hat):
    """Pearson correlation between the real parts."""
    a = np.real(np.asarray(x_true)).astype(float)
    b = np.real(np.asarray(x_hat)).astype(float)
    a = a - a.mean()
    b = b - b.mean()
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("correlation undefined for constant vectors")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def correlation(x_true, x_hat):
    """Magnitude of the Pearson correlation of the real parts."""
    return abs(signed_correlation(x_true, x_hat))


def inner_product_correlation(x_true, x_hat):
    """|<x_true, x_hat>| / (||x_true|| ||x_hat||) without mean removal."""
    x_true = np.asarray(x_true, dtype=complex)
    x_hat = np.asarray(x_hat, dtype=complex)
    denom = np.linalg.norm(x_true) * np.linalg.norm(x_hat)
    return float(abs(np.vdot(x_true, x_hat)) / denom) if denom else 0.0


def binarize(x_hat, threshold=0.5):
    return (np.real(np.asarray(x_hat)) >= threshold).astype(float)
