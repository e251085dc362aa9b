"""BER harness, Eb/N0 calibration, and PSD/OOB measurement."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from . import framing
from .channel import (apply_ltv_array, build_effective_matrix, complex_noise, gen_eva,
                      identity_channel, max_doppler, signal_start)
from .equalizer import MMSEEqualizer
from .modem import ModemConfig, demodulate_array, modulate_array, symbol_energy
from .numerics import welch_psd

CHANNEL_KINDS = ("identity", "awgn", "static", "eva")

# per-frame RNG streams
_BITS, _CHANNEL, _NOISE = 0, 1, 2


@dataclass(frozen=True)
class BerPoint:
    ebn0_db: float
    bit_errors: int
    bits_total: int
    frames: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.bits_total <= 0:
            raise ValueError("bits_total must be positive")

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_total


@dataclass(frozen=True)
class Plateau:
    f_lo: float
    f_hi: float
    level_db: float


@dataclass(frozen=True)
class OobReport:
    inband_edge_hz: float
    oob_power_db: float
    plateau_levels_db: list = field(default_factory=list)
    plateaus_pos: list = field(default_factory=list)
    plateaus_neg: list = field(default_factory=list)

    @property
    def distinct_plateaus(self) -> int:
        """Distinct plateau levels (gap > 3 dB) on the side showing more."""
        return max(len(distinct_levels([p.level_db for p in self.plateaus_pos])),
                   len(distinct_levels([p.level_db for p in self.plateaus_neg])))


@dataclass(frozen=True)
class ChannelSpec:
    kind: str = "eva"
    velocity_kmh: float = 500.0

    def __post_init__(self):
        if self.kind not in CHANNEL_KINDS:
            raise ValueError(f"unknown channel {self.kind!r}; expected one of {CHANNEL_KINDS}")
        if self.velocity_kmh < 0:
            raise ValueError("velocity must be >= 0")

    @property
    def time_invariant_identity(self) -> bool:
        return self.kind in ("identity", "awgn")

    def realize(self, cfg: ModemConfig, rng: np.random.Generator):
        fs = cfg.sample_rate
        if self.time_invariant_identity:
            return identity_channel(fs)
        nu_max = max_doppler(self.velocity_kmh, cfg.carrier_hz)
        return gen_eva(nu_max, fs, rng, doppler=self.kind == "eva")


def frame_rng(seed: int, frame: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, frame, stream]))


# --- calibration -----------------------------------------------------------

def q_function(x):
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2))


def awgn_ber_qpsk(ebn0_db):
    """Gray 4-QAM over AWGN: Q(sqrt(2 Eb/N0))."""
    return q_function(np.sqrt(2 * 10 ** (np.asarray(ebn0_db, dtype=float) / 10)))


def ebn0_to_noise_var(ebn0_db: float, bits_per_symbol: int, cfg: ModemConfig | None = None,
                      symbol_energy_value: float | None = None, energy_per: str = "grid") -> float:
    """Per-sample noise variance N0 for a given Eb/N0.

    Es is the frame's measured transmit energy per delay-Doppler slot (CP
    excluded; see ``modem.symbol_energy`` for ``energy_per``), or 1 when
    no config is given. With unit-energy pulses the matched filter passes
    N0 per received symbol, so Es here is what an AWGN symbol sees.
    """
    if bits_per_symbol not in (2, 4):
        raise ValueError("bits_per_symbol must be 2 or 4")
    if symbol_energy_value is None:
        symbol_energy_value = symbol_energy(cfg, energy_per) if cfg is not None else 1.0
    return symbol_energy_value / (bits_per_symbol * 10 ** (ebn0_db / 10))


def ebn0_at_ber(points, target: float) -> float:
    """Eb/N0 where the BER curve crosses ``target`` (log-linear interpolation).

    Returns nan when the curve does not bracket the target.
    """
    pts = sorted(points, key=lambda p: p.ebn0_db)
    for a, b in zip(pts, pts[1:]):
        if a.ber >= target > b.ber:
            if b.bit_errors == 0:
                return float("nan")
            la, lb, lt = np.log10(a.ber), np.log10(b.ber), np.log10(target)
            return a.ebn0_db + (lt - la) / (lb - la) * (b.ebn0_db - a.ebn0_db)
    return float("nan")


# --- BER -------------------------------------------------------------------

def _frame_bits(cfg: ModemConfig, order: int, seed: int, frame: int):
    n_data = int(framing.data_mask(cfg.M, cfg.N, cfg.zg_per_edge).sum())
    b = framing.bits_per_symbol(order)
    return frame_rng(seed, frame, _BITS).integers(0, 2, n_data * b)


def _frame_grid(cfg: ModemConfig, bits, order: int) -> np.ndarray:
    return framing.frame_from_symbols(framing.qam_map(bits, order), cfg.M, cfg.N,
                                      cfg.zg_per_edge).symbols


def run_ber_curve(cfg: ModemConfig, channel: ChannelSpec, ebn0_db, frames: int, seed: int,
                  qam_order: int = 4, batch: int = 64,
                  energy_per: str = "grid") -> list[BerPoint]:
    """BER at each Eb/N0 with common random numbers across the points.

    Per frame: bits -> QAM -> guarded frame -> modulate -> LTV channel ->
    AWGN -> demodulate -> MMSE with the frame's exact effective matrix ->
    hard decisions. Frame f draws its bits, channel and noise from
    independent streams keyed by (seed, f), so results do not depend on
    the Eb/N0 grid or on batching. ``energy_per`` selects the Es
    reference for the noise calibration.
    """
    if frames < 1:
        raise ValueError("frames must be >= 1")
    ebn0_db = [float(e) for e in np.atleast_1d(ebn0_db)]
    b = framing.bits_per_symbol(qam_order)
    es = symbol_energy(cfg, energy_per)
    sigma2 = [ebn0_to_noise_var(e, b, symbol_energy_value=es) for e in ebn0_db]
    active = np.flatnonzero(framing.data_mask(cfg.M, cfg.N, cfg.zg_per_edge).ravel())
    errors = np.zeros(len(ebn0_db), dtype=np.int64)
    total = 0
    start = signal_start(cfg)
    unbiased = qam_order > 4

    groups = ([list(range(s, min(s + batch, frames))) for s in range(0, frames, batch)]
              if channel.time_invariant_identity else [[f] for f in range(frames)])
    fixed = None
    for group in groups:
        bits = [_frame_bits(cfg, qam_order, seed, f) for f in group]
        D = np.stack([_frame_grid(cfg, bb, qam_order) for bb in bits])
        if fixed is None or not channel.time_invariant_identity:
            ps = channel.realize(cfg, frame_rng(seed, group[0], _CHANNEL))
            H = build_effective_matrix(cfg, ps).H[:, active]
            gram = H.conj().T @ H
            eqs = [MMSEEqualizer(H, s2, gram=gram) for s2 in sigma2]
            fixed = (ps, eqs)
        ps, eqs = fixed
        r = apply_ltv_array(modulate_array(D, cfg), ps, start)
        w = np.stack([complex_noise(r.shape[-1:], frame_rng(seed, f, _NOISE)) for f in group])
        y_sig = demodulate_array(r, cfg).reshape(len(group), -1).T
        y_noise = demodulate_array(w, cfg).reshape(len(group), -1).T
        ref = np.concatenate(bits)
        total += ref.size
        for i, (s2, eq) in enumerate(zip(sigma2, eqs)):
            est = eq(y_sig + np.sqrt(s2) * y_noise, unbiased=unbiased)
            hard = framing.qam_demap(est.T.ravel(), qam_order)
            errors[i] += int(np.count_nonzero(hard != ref))
    return [BerPoint(e, int(n), total, frames, seed) for e, n in zip(ebn0_db, errors)]


def run_ber_point(cfg: ModemConfig, channel: ChannelSpec, ebn0_db: float, frames: int,
                  seed: int, qam_order: int = 4) -> BerPoint:
    return run_ber_curve(cfg, channel, [ebn0_db], frames, seed, qam_order)[0]


# --- spectra ---------------------------------------------------------------

def transmit_psd(cfg: ModemConfig, frames: int = 100, seed: int = 0, qam_order: int = 4,
                 segment_len: int = 2048, overlap: float = 0.5, window="hann"):
    """Welch PSD of ``frames`` back-to-back transmit frames (CP included)."""
    D = np.stack([_frame_grid(cfg, _frame_bits(cfg, qam_order, seed, f), qam_order)
                  for f in range(frames)])
    x = modulate_array(D, cfg).ravel()
    return welch_psd(x, cfg.sample_rate, segment_len, overlap, window)


def find_plateaus(freqs, psd_db, lo: float, hi: float, tol_db: float = 1.0,
                  min_frac: float = 0.05) -> list[Plateau]:
    """Maximal runs in [lo, hi] whose PSD spans < tol_db and whose width
    exceeds ``min_frac`` of the window (greedy, left to right)."""
    freqs = np.asarray(freqs)
    sel = (freqs >= lo) & (freqs <= hi)
    f, p = freqs[sel], np.asarray(psd_db)[sel]
    min_width = min_frac * (hi - lo)
    out = []
    i = 0
    while i < f.size:
        j = i + 1
        top = bot = p[i]
        while j < f.size:
            top, bot = max(top, p[j]), min(bot, p[j])
            if top - bot >= tol_db:
                break
            j += 1
        if f[j - 1] - f[i] > min_width:
            out.append(Plateau(float(f[i]), float(f[j - 1]), float(p[i:j].mean())))
            i = j
        else:
            i += 1
    return out


def distinct_levels(levels, sep_db: float = 3.0) -> list[float]:
    """Merge levels whose sorted neighbours are within ``sep_db``; one
    representative (the cluster mean) per group."""
    lv = sorted(levels)
    if not lv:
        return []
    groups = [[lv[0]]]
    for v in lv[1:]:
        if v - groups[-1][-1] > sep_db:
            groups.append([v])
        else:
            groups[-1].append(v)
    return [float(np.mean(g)) for g in groups]


def measure_oob(freqs, psd_db, band_edge_hz: float, guard_hz: float) -> OobReport:
    """Mean dB level over |f| in [edge + guard, 2 edge]; plateaus searched
    in the transition band |f| in [edge - guard, edge + guard], each side
    separately."""
    freqs = np.asarray(freqs, dtype=float)
    psd_db = np.asarray(psd_db, dtype=float)
    lo, hi = band_edge_hz + guard_hz, 2 * band_edge_hz
    df = np.min(np.diff(freqs)) if freqs.size > 1 else 0.0
    if guard_hz < 0 or lo >= hi or hi > np.abs(freqs).max() + df:
        raise ValueError(f"OOB window [{lo}, {hi}] Hz outside the spectrum")
    af = np.abs(freqs)
    win = (af >= lo) & (af <= hi)
    oob = float(psd_db[win].mean())
    t_lo, t_hi = band_edge_hz - guard_hz, band_edge_hz + guard_hz
    pos = find_plateaus(freqs, psd_db, t_lo, t_hi)
    neg = find_plateaus(-freqs[::-1], psd_db[::-1], t_lo, t_hi)
    levels = [p.level_db for p in pos] + [p.level_db for p in neg]
    return OobReport(band_edge_hz, oob, levels, pos, neg)


def oob_window(cfg: ModemConfig):
    """(band_edge_hz, guard_hz) for a config: edge at M df / 2, guard equal
    to the roll-off excess bandwidth."""
    edge = cfg.M * cfg.delta_f / 2
    return edge, cfg.pulse.rolloff * edge
