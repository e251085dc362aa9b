import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import crandn
from ddpulse.channel import ChannelMatrix
from ddpulse.equalizer import MMSEEqualizer, SingularChannelError, mmse_equalize
from ddpulse.framing import qam_demap, qam_map


def well_conditioned(rng, n):
    return np.eye(n) + 0.2 * crandn(rng, n, n) / np.sqrt(n)


def test_identity_zero_noise(rng):
    y = crandn(rng, 10)
    out = mmse_equalize(y, np.eye(10), 0.0)
    assert np.allclose(out.estimates, y) and out.residual_mse == 0.0


def test_zero_forcing_limit(rng):
    H = well_conditioned(rng, 16)
    y = crandn(rng, 16)
    assert np.allclose(mmse_equalize(y, H, 0.0).estimates, np.linalg.solve(H, y), atol=1e-10)


def test_matches_normal_equations(rng):
    H = well_conditioned(rng, 64)
    y = crandn(rng, 64)
    ref = np.linalg.solve(H.conj().T @ H + 0.1 * np.eye(64), H.conj().T @ y)
    out = mmse_equalize(y, ChannelMatrix(H), 0.1)
    assert np.abs(out.estimates - ref).max() < 1e-8
    assert np.all(np.isfinite(out.estimates)) and out.residual_mse >= 0


def test_singular_zero_noise_raises():
    H = np.ones((4, 4))
    with pytest.raises(SingularChannelError):
        mmse_equalize(np.ones(4), H, 0.0)
    # with noise the regularised system is solvable
    assert np.all(np.isfinite(mmse_equalize(np.ones(4), H, 0.1).estimates))


def test_input_validation():
    with pytest.raises(ValueError):
        MMSEEqualizer(np.ones((3, 4)), 0.1)
    with pytest.raises(ValueError):
        MMSEEqualizer(np.eye(3), -1.0)


def test_tall_matrix_and_batches(rng):
    H = crandn(rng, 12, 8)
    Y = crandn(rng, 12, 5)
    eq = MMSEEqualizer(H, 0.2)
    ref = np.linalg.solve(H.conj().T @ H + 0.2 * np.eye(8), H.conj().T @ Y)
    assert np.allclose(eq(Y), ref, atol=1e-10)
    assert np.allclose(eq(Y[:, 2]), ref[:, 2], atol=1e-10)


def test_shared_gram_matches(rng):
    H = crandn(rng, 10, 10)
    y = crandn(rng, 10)
    a = MMSEEqualizer(H, 0.5)(y)
    b = MMSEEqualizer(H, 0.5, gram=H.conj().T @ H)(y)
    assert np.allclose(a, b)


def test_unbiased_scaling(rng):
    H = well_conditioned(rng, 16)
    eq = MMSEEqualizer(H, 0.3)
    g = eq.gain_diagonal()
    assert np.all((g > 0) & (g < 1))
    y = crandn(rng, 16)
    assert np.allclose(eq(y, unbiased=True), eq(y) / g)
    # noiseless input: unbiased estimate of a single symbol's own contribution is exact
    e = np.zeros(16, dtype=complex)
    e[3] = 1
    W_H_col = eq(H @ e)
    assert (W_H_col / g)[3] == pytest.approx(1.0)


@given(st.integers(0, 2**31), st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_scaling_consistency(seed, a):
    rng = np.random.default_rng(seed)
    H = well_conditioned(rng, 12)
    y = crandn(rng, 12)
    s2 = 0.2
    base = mmse_equalize(y, H, s2).estimates
    scaled = mmse_equalize(a * y, a * H, abs(a) ** 2 * s2).estimates
    assert np.allclose(base, scaled, atol=1e-8)


def test_error_count_non_increasing_towards_true_noise(rng):
    # noiseless y from an ill-conditioned H: overestimating sigma^2 biases decisions
    n, trials = 32, 40
    counts = {s2: 0 for s2 in (10.0, 3.0, 1.0, 0.3, 0.01)}
    for _ in range(trials):
        H = crandn(rng, n, n)
        bits = rng.integers(0, 2, 2 * n)
        y = H @ qam_map(bits, 4)
        for s2 in counts:
            est = mmse_equalize(y, H, s2).estimates
            counts[s2] += int(np.count_nonzero(qam_demap(est, 4) != bits))
    seq = list(counts.values())
    assert all(a >= b for a, b in zip(seq, seq[1:]))
    assert seq[0] > seq[-1]
