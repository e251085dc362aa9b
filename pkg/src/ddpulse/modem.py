"""Generalised delay-Doppler modem.

Transmitter: L_us-fold expansion along delay -> pulse-shaping along delay
-> IDFT along Doppler -> overlap-add serialisation -> CP. The receiver
mirrors it. The three schemes differ only in the shaping stage:

* ``cps-otfs``: M'-point circular convolution with a frequency-sampled pulse.
* ``lps-otfs``: linear convolution with truncated taps, tails overlap-add.
* ``oddm``: linear convolution of Doppler column k with p_k.

Array-level functions accept batches on leading axes, which is how the
effective channel matrix is probed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import framing
from .framing import BasebandSignal, DelayDopplerFrame, GridGeometry
from .numerics import (ComplexVector, circular_convolve, convolve_axis,
                       dft_along_time, downsample, idft_along_doppler, upsample)
from .pulses import Pulse, PulseSpec, design_pulse

SCHEMES = ("cps-otfs", "lps-otfs", "oddm")
DOMAINS = ("delay-doppler", "delay-time")


@dataclass(frozen=True)
class ModemConfig:
    M: int = 64
    N: int = 32
    scheme: str = "cps-otfs"
    pulse: PulseSpec = field(default_factory=lambda: PulseSpec(mode="circular_freq_sampled"))
    cp_len_base: int = 4
    zg_per_edge: int = 0
    delta_f: float = 15e3
    carrier_hz: float = 5.9e9

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.M < 1 or self.N < 1:
            raise ValueError("M and N must be >= 1")
        if self.cp_len_base < 0:
            raise ValueError("cp_len_base must be >= 0")
        if 2 * self.zg_per_edge >= self.M or self.zg_per_edge < 0:
            raise ValueError(f"zg_per_edge={self.zg_per_edge} invalid for M={self.M}")
        circular = self.pulse.mode == "circular_freq_sampled"
        if (self.scheme == "cps-otfs") != circular:
            raise ValueError(f"scheme {self.scheme} requires pulse mode "
                             f"{'circular_freq_sampled' if self.scheme == 'cps-otfs' else 'linear_taps'}")
        if not circular and self.pulse.family != "rect" and self.pulse.Q > max(self.M // 2, 1):
            raise ValueError(f"Q={self.pulse.Q} exceeds M/2={self.M // 2}")

    @classmethod
    def build(cls, scheme: str = "cps-otfs", *, family: str = "rrc", rolloff: float = 0.1,
              Q: int = 8, L_us: int = 2, **kw) -> "ModemConfig":
        """Config with the pulse mode implied by the scheme."""
        mode = "circular_freq_sampled" if scheme == "cps-otfs" else "linear_taps"
        return cls(scheme=scheme, pulse=PulseSpec(family, rolloff, Q, L_us, mode), **kw)

    @property
    def L_us(self) -> int:
        return self.pulse.L_us

    @property
    def M_us(self) -> int:
        return self.M * self.L_us

    @property
    def cp_len(self) -> int:
        """CP length at the oversampled rate, L'_cp = L_cp L_us."""
        return self.cp_len_base * self.L_us

    @property
    def tail_len(self) -> int:
        """Transient samples on each side of the body (Q' for truncated pulses)."""
        if self.scheme == "cps-otfs":
            return 0
        if self.pulse.family == "rect":
            return self.L_us
        return self.pulse.Q * self.L_us

    @property
    def body_len(self) -> int:
        return self.M_us * self.N + 2 * self.tail_len

    @property
    def frame_len(self) -> int:
        return self.cp_len + self.body_len

    @property
    def geometry(self) -> GridGeometry:
        return GridGeometry(self.M, self.N, self.L_us, self.delta_f)

    @property
    def sample_rate(self) -> float:
        return self.geometry.sample_rate


@lru_cache(maxsize=64)
def _pulse(spec: PulseSpec, M_us: int) -> Pulse:
    return design_pulse(spec, M_us)


def pulse_for(cfg: ModemConfig) -> Pulse:
    return _pulse(cfg.pulse, cfg.M_us)


def doppler_taps(p: Pulse, N: int, M_us: int, conjugate_reverse: bool = False) -> np.ndarray:
    """(T, N) array of p_k taps, column k for Doppler bin k.

    With ``conjugate_reverse`` the columns are the matched filters
    p_k^*[-l'], which start at ``-(p.start + T - 1)``.
    """
    T = p.taps.size
    idx = np.arange(T) + p.start
    ramps = np.exp(2j * np.pi * np.outer(idx, np.arange(N)) / (N * M_us))
    taps = p.taps[:, None] * ramps
    if conjugate_reverse:
        taps = np.conj(taps[::-1])
    return taps


def _shape(cfg: ModemConfig, X: np.ndarray) -> np.ndarray:
    """Pulse-shape along delay (axis -2). Linear output spans [-tail, M' + tail)."""
    p = pulse_for(cfg)
    if cfg.scheme == "cps-otfs":
        return circular_convolve(X, p.taps, axis=-2)
    taps = doppler_taps(p, cfg.N, cfg.M_us) if cfg.scheme == "oddm" else p.taps
    y = convolve_axis(X, taps, axis=-2)
    return _embed(y, p.start, cfg)


def _embed(y: np.ndarray, y_start: int, cfg: ModemConfig) -> np.ndarray:
    tail = cfg.tail_len
    W = cfg.M_us + 2 * tail
    out = np.zeros(y.shape[:-2] + (W, y.shape[-1]), dtype=complex)
    off = y_start + tail
    n = min(y.shape[-2], W - off)
    out[..., off:off + n, :] = y[..., :n, :]
    return out


def _matched(cfg: ModemConfig, Y: np.ndarray) -> np.ndarray:
    """Matched filter along delay and L_ds-fold downsampling at phase 0."""
    p = pulse_for(cfg)
    if cfg.scheme == "cps-otfs":
        Z = circular_convolve(Y, p.matched().taps, axis=-2)
        return downsample(Z, cfg.L_us, 0, axis=-2)
    mf = p.matched()
    taps = doppler_taps(p, cfg.N, cfg.M_us, conjugate_reverse=True) if cfg.scheme == "oddm" else mf.taps
    Z = convolve_axis(Y, taps, axis=-2)
    z_start = -cfg.tail_len + mf.start
    pos = np.arange(cfg.M) * cfg.L_us - z_start
    return Z[..., pos, :]


def modulate_array(D, cfg: ModemConfig, domain: str = "delay-doppler") -> np.ndarray:
    """Transmit samples (CP first) for a batch of (M, N) grids."""
    D = np.asarray(D, dtype=complex)
    if D.shape[-2:] != (cfg.M, cfg.N):
        raise ValueError(f"frame shape {D.shape[-2:]} != ({cfg.M}, {cfg.N})")
    if domain not in DOMAINS:
        raise ValueError(f"unknown domain {domain!r}")
    De = upsample(D, cfg.L_us, axis=-2)
    if domain == "delay-doppler":
        X = idft_along_doppler(_shape(cfg, De), axis=-1)
    else:
        if cfg.scheme == "oddm":
            raise ValueError("ODDM pulse-shaping is only defined in the delay-Doppler domain")
        X = _shape(cfg, idft_along_doppler(De, axis=-1))
    body = framing.overlap_add(X, cfg.M_us)
    return framing.add_cp_array(body, cfg.cp_len)


def demodulate_array(r, cfg: ModemConfig, domain: str = "delay-doppler") -> np.ndarray:
    """Soft delay-Doppler grid from received samples whose first sample is
    the first transmitted (CP) sample. Extra trailing samples are ignored."""
    r = np.asarray(r, dtype=complex)
    if r.shape[-1] < cfg.frame_len:
        raise ValueError(f"received length {r.shape[-1]} < frame length {cfg.frame_len}")
    if domain not in DOMAINS:
        raise ValueError(f"unknown domain {domain!r}")
    body = r[..., cfg.cp_len:cfg.frame_len]
    Y = framing.deserialize(body, cfg.M_us, cfg.N, cfg.tail_len)
    if domain == "delay-doppler":
        return _matched(cfg, dft_along_time(Y, axis=-1))
    if cfg.scheme == "oddm":
        raise ValueError("ODDM matched filtering is only defined in the delay-Doppler domain")
    return dft_along_time(_matched(cfg, Y), axis=-1)


def modulate(frame, cfg: ModemConfig, domain: str = "delay-doppler") -> BasebandSignal:
    D = frame.symbols if isinstance(frame, DelayDopplerFrame) else frame
    x = modulate_array(D, cfg, domain)
    if x.ndim != 1:
        raise ValueError("modulate takes a single frame; use modulate_array for batches")
    start = -cfg.tail_len - cfg.cp_len
    return BasebandSignal(ComplexVector(x, start), cfg.sample_rate, cfg.cp_len, cfg.tail_len)


def demodulate(r: BasebandSignal, cfg: ModemConfig, domain: str = "delay-doppler") -> np.ndarray:
    """Pre-equalisation grid D~[l, k] (M x N)."""
    expected = -cfg.tail_len - cfg.cp_len
    if r.samples.start != expected:
        raise ValueError(f"signal starts at {r.samples.start}, expected {expected}")
    return demodulate_array(r.samples.data, cfg, domain)


def probe_chunks(cfg: ModemConfig, columns=None, chunk: int = 256):
    """Yield (column indices, batch of unit frames) over vec(D) positions.

    vec(D) is row-major: position c = l N + k.
    """
    MN = cfg.M * cfg.N
    columns = np.arange(MN) if columns is None else np.asarray(columns)
    for s in range(0, columns.size, chunk):
        cols = columns[s:s + chunk]
        E = np.zeros((cols.size, MN), dtype=complex)
        E[np.arange(cols.size), cols] = 1.0
        yield cols, E.reshape(cols.size, cfg.M, cfg.N)


def basis_energies(cfg: ModemConfig) -> np.ndarray:
    """Transmit body energy of each unit-symbol frame, as an (M, N) grid."""
    out = np.empty(cfg.M * cfg.N)
    for cols, E in probe_chunks(cfg):
        x = modulate_array(E, cfg)[..., cfg.cp_len:]
        out[cols] = np.sum(np.abs(x) ** 2, axis=-1)
    return out.reshape(cfg.M, cfg.N)


def symbol_energy(cfg: ModemConfig, per: str = "grid") -> float:
    """Mean transmit energy per delay-Doppler symbol slot for unit-energy
    data symbols, CP excluded.

    ``per="grid"`` averages the frame's energy over all M N slots, so zero
    guards lower it (the measured transmit power of the configured frame).
    ``per="data"`` averages over data slots only.
    """
    if per not in ("grid", "data"):
        raise ValueError(f"per must be 'grid' or 'data', got {per!r}")
    E = basis_energies(cfg)
    mask = framing.data_mask(cfg.M, cfg.N, cfg.zg_per_edge)
    total = float(E[mask].sum())
    return total / (E.size if per == "grid" else int(mask.sum()))


def dump_test_vectors(cfg: ModemConfig, seed: int, out_dir, count: int = 1,
                      qam_order: int = 4) -> list[tuple[Path, Path]]:
    """Write ``count`` (frame CSV, signal CSV) pairs for cross-checking
    another implementation. Frame i draws its bits from (seed, i)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    b = framing.bits_per_symbol(qam_order)
    n_data = int(framing.data_mask(cfg.M, cfg.N, cfg.zg_per_edge).sum())
    pairs = []
    for i in range(count):
        rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
        syms = framing.qam_map(rng.integers(0, 2, n_data * b), qam_order)
        frame = framing.frame_from_symbols(syms, cfg.M, cfg.N, cfg.zg_per_edge)
        fpath, spath = out / f"frame_{i:03d}.csv", out / f"signal_{i:03d}.csv"
        framing.write_frame_csv(frame, fpath)
        framing.write_signal_csv(modulate(frame, cfg), spath)
        pairs.append((fpath, spath))
    return pairs
