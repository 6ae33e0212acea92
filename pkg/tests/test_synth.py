import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from prsamp.model import BINARY01, COMPLEX_GAUSSIAN
from prsamp.synth import (
    BINARY,
    DENSE_COMPLEX,
    binarize,
    correlation,
    gen_matrix,
    gen_signal,
    inner_product_correlation,
    nmse_phase_aligned,
    normalized_residual,
    signed_correlation,
    synthesize,
    synthesize_linear,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
vectors = arrays(complex, 16, elements=st.builds(complex, finite, finite))


def test_binary_matrix_statistics():
    h = gen_matrix(BINARY01, 200, 100, 5)
    assert set(np.unique(h.entries.real)) == {0.0, 1.0}
    assert abs(h.entries.real.mean() - 0.5) < 3 / np.sqrt(200 * 100)


def test_gaussian_matrix_row_energy():
    n = 400
    h = gen_matrix(COMPLEX_GAUSSIAN, 300, n, 6)
    assert abs(np.mean(np.sum(np.abs(h.entries) ** 2, axis=1)) - 1) < 5 / np.sqrt(n)


def test_generators_are_seed_deterministic_and_distinct():
    assert np.array_equal(gen_matrix(BINARY01, 8, 8, 1).entries, gen_matrix(BINARY01, 8, 8, 1).entries)
    assert not np.array_equal(gen_matrix(BINARY01, 8, 8, 1).entries,
                              gen_matrix(BINARY01, 8, 8, 2).entries)
    a = gen_signal(DENSE_COMPLEX, 32, 1.0, 3).values
    assert np.array_equal(a, gen_signal(DENSE_COMPLEX, 32, 1.0, 3).values)
    assert not np.array_equal(a, gen_signal(DENSE_COMPLEX, 32, 1.0, 4).values)


def test_signal_kinds():
    assert np.all(gen_signal(DENSE_COMPLEX, 64, 1.0, 0).values != 0)
    assert np.count_nonzero(gen_signal(DENSE_COMPLEX, 64, 0.25, 0).values) == 16
    x = gen_signal(BINARY, 256, 50, 0).values
    assert np.sum(x == 1) == 50 and np.sum(x == 0) == 206
    with pytest.raises(ValueError):
        gen_signal(BINARY, 8, 9, 0)
    with pytest.raises(ValueError):
        gen_matrix("sparse", 2, 2, 0)


def test_noiseless_synthesis_is_exact():
    h = gen_matrix(COMPLEX_GAUSSIAN, 40, 20, 1)
    x = gen_signal(DENSE_COMPLEX, 20, 1.0, 2)
    inst = synthesize(h, x, float("inf"), 3)
    assert inst.delta == 0
    assert np.array_equal(inst.y, np.abs(h.entries @ x.values))
    assert normalized_residual(inst, x.values) == 0.0


def test_noise_level_follows_snr():
    h = gen_matrix(COMPLEX_GAUSSIAN, 50, 10, 1)
    x = gen_signal(DENSE_COMPLEX, 10, 1.0, 2)
    power = np.mean(np.abs(h.entries @ x.values) ** 2)
    assert synthesize(h, x, 30.0, 0).delta == pytest.approx(1e-3 * power, rel=1e-12)
    assert synthesize(h, x, 0.0, 0).delta == pytest.approx(power, rel=1e-12)
    lin = synthesize_linear(h, x, 20.0, 0)
    assert lin.linear and lin.delta == pytest.approx(1e-2 * power, rel=1e-12)


def test_synthesis_dimension_mismatch():
    with pytest.raises(ValueError):
        synthesize(gen_matrix(BINARY01, 4, 3, 0), np.ones(4), 30.0, 0)


def test_nmse_examples():
    x = gen_signal(DENSE_COMPLEX, 64, 1.0, 9).values
    assert nmse_phase_aligned(x, np.zeros_like(x)) == 1.0
    assert nmse_phase_aligned(x, 2 * x) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(ValueError):
        nmse_phase_aligned(np.zeros(3), np.ones(3))


@given(vectors, st.floats(0, 2 * np.pi))
def test_nmse_phase_invariance(x, phi):
    if np.linalg.norm(x) < 1e-3:
        return
    assert nmse_phase_aligned(x, np.exp(1j * phi) * x) < 1e-12


@given(vectors, vectors)
def test_alignment_never_hurts(x, x_hat):
    energy = np.sum(np.abs(x) ** 2)
    if energy < 1e-6:
        return
    raw = np.sum(np.abs(x - x_hat) ** 2) / energy
    assert nmse_phase_aligned(x, x_hat) <= raw * (1 + 1e-12) + 1e-12


def test_correlation_examples():
    x = gen_signal(BINARY, 64, 20, 1).values
    assert correlation(x, x) == pytest.approx(1.0)
    assert signed_correlation(x, 1 - x) == pytest.approx(-1.0)
    assert correlation(x, 1 - x) == pytest.approx(1.0)
    assert inner_product_correlation(x, 3 * x) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        correlation(np.ones(4), x[:4])


def test_correlation_of_independent_vectors_is_small():
    # the null |r| exceeds 0.25 at N = 256 with probability ~5e-5
    rng = np.random.default_rng(11)
    big = sum(correlation(rng.standard_normal(256), rng.standard_normal(256)) >= 0.25
              for _ in range(500))
    assert big <= 5


def test_binarize():
    x = gen_signal(BINARY, 32, 7, 0).values
    assert np.array_equal(binarize(x), x.real)
    assert not binarize(-np.abs(np.arange(1, 9)) + 0j).any()
    assert np.array_equal(binarize(np.array([0.49, 0.5, 0.51])), [0, 1, 1])
