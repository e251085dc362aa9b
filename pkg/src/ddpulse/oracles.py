"""Independent constructions of the transmit signal, used to cross-check
the modem. None of them goes through the modem's shaping/serialisation
code; they are slow and meant for small grids only."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .framing import BasebandSignal, DelayDopplerFrame, add_cp
from .modem import ModemConfig, demodulate_array, modulate, modulate_array, pulse_for
from .numerics import ComplexVector

MAX_ORACLE_SIZE = 4096


def _grid(frame, cfg: ModemConfig) -> np.ndarray:
    D = frame.symbols if isinstance(frame, DelayDopplerFrame) else np.asarray(frame, dtype=complex)
    if D.shape != (cfg.M, cfg.N):
        raise ValueError(f"frame shape {D.shape} != ({cfg.M}, {cfg.N})")
    if cfg.M * cfg.N * cfg.L_us > MAX_ORACLE_SIZE:
        raise ValueError("oracle restricted to M N L_us <= 4096")
    return D


def _wrap(body: np.ndarray, cfg: ModemConfig) -> BasebandSignal:
    s = BasebandSignal(ComplexVector(body, -cfg.tail_len), cfg.sample_rate, 0, cfg.tail_len)
    return add_cp(s, cfg.cp_len)


def pulse_train(cfg: ModemConfig, kappa: np.ndarray) -> np.ndarray:
    """u[kappa'] = sum_n p[kappa' - n M'] evaluated at arbitrary indices."""
    p = pulse_for(cfg).vector
    return sum(p.at(kappa - n * cfg.M_us) for n in range(cfg.N))


def oddm_direct_oracle(frame, cfg: ModemConfig) -> BasebandSignal:
    """ODDM by the direct sum over (l, k):

    x[kappa'] = N^{-1/2} sum_l sum_k D[l,k] u[kappa' - l L_us]
                e^{j 2 pi k (kappa' - l L_us) / (N M')}

    The N^{-1/2} matches the modem's unit-gain normalisation.
    """
    D = _grid(frame, cfg)
    L, NM = cfg.L_us, cfg.N * cfg.M_us
    kappa = np.arange(-cfg.tail_len, cfg.M_us * cfg.N + cfg.tail_len)
    x = np.zeros(kappa.size, dtype=complex)
    k = np.arange(cfg.N)
    for l in range(cfg.M):
        shifted = kappa - l * L
        u = pulse_train(cfg, shifted)
        for kk in k:
            if D[l, kk] != 0:
                x += D[l, kk] * u * np.exp(2j * np.pi * kk * shifted / NM)
    return _wrap(x / np.sqrt(cfg.N), cfg)


def staggered_ofdm_oracle(frame, cfg: ModemConfig) -> BasebandSignal:
    """ODDM as M pulse-shaped OFDM signals, row l staggered by l L_us samples."""
    D = _grid(frame, cfg)
    L, NM = cfg.L_us, cfg.N * cfg.M_us
    lo = -cfg.tail_len
    kappa = np.arange(lo, cfg.M_us * cfg.N + cfg.tail_len)
    # each row signal on its own axis, long enough to shift by up to (M-1) L
    own = np.arange(lo - (cfg.M - 1) * L, kappa[-1] + 1)
    u = pulse_train(cfg, own)
    carriers = np.exp(2j * np.pi * np.outer(own, np.arange(cfg.N)) / NM)
    x = np.zeros(kappa.size, dtype=complex)
    for l in range(cfg.M):
        x_l = (carriers @ D[l]) * u
        x_l = ComplexVector(x_l, own[0])
        x += x_l.at(kappa - l * L)
    return _wrap(x / np.sqrt(cfg.N), cfg)


def isfft_zp_ofdm_oracle(frame, cfg: ModemConfig) -> BasebandSignal:
    """C-PS OTFS with the brick-wall pulse built the classical way.

    ISFFT to the time-frequency grid, zero-pad each slot's M-bin spectrum
    to M' bins (the band-edge bin is split over +-M/2 with amplitude
    1/sqrt(2) each when M' > M), M'-point inverse transform, concatenate.
    """
    D = _grid(frame, cfg)
    if cfg.scheme != "cps-otfs" or cfg.pulse.family != "sinc":
        raise ValueError("the zero-padding oracle covers C-PS OTFS with the sinc pulse")
    M, N, Mu, L = cfg.M, cfg.N, cfg.M_us, cfg.L_us
    l = np.arange(M)
    m = np.arange(M)
    n = np.arange(N)
    k = np.arange(N)
    # X_tf[m, n] = N^{-1/2} sum_{l,k} D[l,k] e^{j 2 pi (n k / N - m l / M)}
    A = np.exp(-2j * np.pi * np.outer(m, l) / M)
    B = np.exp(2j * np.pi * np.outer(k, n) / N)
    X_tf = A @ D @ B / np.sqrt(N)
    # subcarrier m of the M-grid sits at frequency index f(m) in (-M/2, M/2]
    if L == 1:
        weights = {int(b): [(int(b), 1.0)] for b in m}
    else:
        weights = {}
        for b in m:
            f = b if b < M / 2 else b - M
            if M % 2 == 0 and b == M // 2:
                weights[int(b)] = [(M // 2, 2 ** -0.5), (-M // 2, 2 ** -0.5)]
            else:
                weights[int(b)] = [(int(f), 1.0)]
    lp = np.arange(Mu)
    x = np.zeros((N, Mu), dtype=complex)
    for b, places in weights.items():
        for f, w in places:
            x += w * np.outer(X_tf[b], np.exp(2j * np.pi * f * lp / Mu))
    x *= np.sqrt(L) / Mu
    return _wrap(x.ravel(), cfg)


@dataclass(frozen=True)
class SuiteResult:
    name: str
    max_err: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.max_err <= self.tol)


def _random_frames(rng, count, M, N):
    return (rng.standard_normal((count, M, N)) + 1j * rng.standard_normal((count, M, N))) / np.sqrt(2)


def run_equivalence_suites(frames: int = 20, seed: int = 0) -> list[SuiteResult]:
    """Cross-checks of the modem against alternative orderings and the
    oracles above, on random complex Gaussian frames."""
    rng = np.random.default_rng(seed)
    out = []
    for M, N, L in ((8, 4, 2), (16, 8, 2)):
        for scheme in ("cps-otfs", "lps-otfs"):
            cfg = ModemConfig.build(scheme, M=M, N=N, L_us=L, Q=min(4, M // 2))
            D = _random_frames(rng, frames, M, N)
            x_dd, x_dt = modulate_array(D, cfg, "delay-doppler"), modulate_array(D, cfg, "delay-time")
            out.append(SuiteResult(f"tx-order {scheme} {M}x{N}", float(np.abs(x_dd - x_dt).max()), 1e-10))
            r = x_dd + _random_frames(rng, 1, 1, x_dd.shape[-1])[0, 0]
            y_dd, y_dt = demodulate_array(r, cfg, "delay-doppler"), demodulate_array(r, cfg, "delay-time")
            out.append(SuiteResult(f"rx-order {scheme} {M}x{N}", float(np.abs(y_dd - y_dt).max()), 1e-10))
    cfg = ModemConfig.build("oddm", M=16, N=8, Q=4)
    e_direct = e_stag = 0.0
    for D in _random_frames(rng, frames, 16, 8):
        x = modulate(D, cfg).samples.data
        e_direct = max(e_direct, np.abs(x - oddm_direct_oracle(D, cfg).samples.data).max())
        e_stag = max(e_stag, np.abs(x - staggered_ofdm_oracle(D, cfg).samples.data).max())
    out.append(SuiteResult("oddm pipeline vs direct sum", float(e_direct), 1e-9))
    out.append(SuiteResult("oddm pipeline vs staggered ofdm", float(e_stag), 1e-9))
    for M, N in ((8, 4), (16, 8)):
        cfg = ModemConfig.build("cps-otfs", family="sinc", rolloff=0.0, M=M, N=N)
        err = max(np.abs(modulate(D, cfg).samples.data - isfft_zp_ofdm_oracle(D, cfg).samples.data).max()
                  for D in _random_frames(rng, frames, M, N))
        out.append(SuiteResult(f"cps sinc vs isfft zero-pad {M}x{N}", float(err), 1e-10))
    cfg = ModemConfig.build("cps-otfs", M=16, N=8)
    D = _random_frames(rng, frames, 16, 8)
    err = np.abs(demodulate_array(modulate_array(D, cfg), cfg) - D).max()
    out.append(SuiteResult("cps rrc back-to-back", float(err), 1e-6))
    return out
