import numpy as np
import pytest

from conftest import crandn
from ddpulse.modem import ModemConfig, modulate, pulse_for
from ddpulse.oracles import (isfft_zp_ofdm_oracle, oddm_direct_oracle, pulse_train,
                             run_equivalence_suites, staggered_ofdm_oracle)

ODDM = ModemConfig.build("oddm", M=16, N=8, Q=4)


def test_oddm_single_symbol_is_pulse_train():
    D = np.zeros((16, 8), dtype=complex)
    D[0, 0] = 1
    s = oddm_direct_oracle(D, ODDM)
    body = s.body
    u = pulse_train(ODDM, body.indices) / np.sqrt(8)
    assert np.allclose(body.data, u, atol=1e-15)


def test_oddm_oracles_agree_with_each_other_and_pipeline(rng):
    for _ in range(3):
        D = crandn(rng, 16, 8)
        a = oddm_direct_oracle(D, ODDM).samples.data
        b = staggered_ofdm_oracle(D, ODDM).samples.data
        x = modulate(D, ODDM).samples.data
        assert np.abs(a - b).max() < 1e-10
        assert np.abs(a - x).max() < 1e-9


def test_oddm_oracle_linearity(rng):
    A, B = crandn(rng, 16, 8), crandn(rng, 16, 8)
    alpha = 0.3 - 1.2j
    lhs = oddm_direct_oracle(alpha * A + B, ODDM).samples.data
    rhs = alpha * oddm_direct_oracle(A, ODDM).samples.data + oddm_direct_oracle(B, ODDM).samples.data
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_staggered_single_row_and_zero_frame(rng):
    c = ModemConfig.build("oddm", M=1, N=8, Q=1, L_us=2)
    D = crandn(rng, 1, 8)
    s = staggered_ofdm_oracle(D, c).body
    kappa = s.indices
    carriers = np.exp(2j * np.pi * np.outer(kappa, np.arange(8)) / (8 * c.M_us))
    ref = (carriers @ D[0]) * pulse_train(c, kappa) / np.sqrt(8)
    assert np.allclose(s.data, ref, atol=1e-14)
    assert not np.any(staggered_ofdm_oracle(np.zeros((16, 8)), ODDM).samples.data)


@pytest.mark.parametrize("L", [1, 2, 3])
def test_isfft_zero_padding_matches_cps_sinc(L, rng):
    c = ModemConfig.build("cps-otfs", family="sinc", rolloff=0.0, M=8, N=4, L_us=L)
    D = crandn(rng, 8, 4)
    assert np.abs(isfft_zp_ofdm_oracle(D, c).samples.data - modulate(D, c).samples.data).max() < 1e-10


def test_isfft_l1_is_classical_otfs(rng):
    c = ModemConfig.build("cps-otfs", family="sinc", rolloff=0.0, M=8, N=4, L_us=1)
    assert np.allclose(np.abs(np.fft.fft(pulse_for(c).taps)), 1.0)
    D = crandn(rng, 8, 4)
    x = isfft_zp_ofdm_oracle(D, c).body.data
    ref = (np.fft.ifft(D, axis=1, norm="ortho")).T.ravel()  # Heisenberg of ISFFT = IDFT along Doppler
    assert np.allclose(x, ref, atol=1e-12)


def test_isfft_single_symbol_energy():
    c = ModemConfig.build("cps-otfs", family="sinc", rolloff=0.0, M=8, N=4)
    D = np.zeros((8, 4))
    D[0, 0] = 1
    assert isfft_zp_ofdm_oracle(D, c).body.energy == pytest.approx(1.0)


def test_oracle_guards():
    with pytest.raises(ValueError):
        isfft_zp_ofdm_oracle(np.zeros((8, 4)), ModemConfig.build("cps-otfs", M=8, N=4))
    big = ModemConfig.build("oddm", M=64, N=64)
    with pytest.raises(ValueError):
        oddm_direct_oracle(np.zeros((64, 64)), big)
    with pytest.raises(ValueError):
        oddm_direct_oracle(np.zeros((8, 8)), ODDM)


def test_equivalence_suite_runner():
    res = run_equivalence_suites(frames=2, seed=1)
    assert len(res) == 13 and all(r.passed for r in res)
