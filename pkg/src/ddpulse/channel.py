"""Tapped-delay-line LTV channel with per-path Doppler, AWGN, and the
effective delay-Doppler channel matrix seen by the equaliser."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .framing import BasebandSignal
from .modem import ModemConfig, demodulate_array, modulate_array, probe_chunks
from .numerics import ComplexVector

SPEED_OF_LIGHT = 299_792_458.0
MATRIX_CAP = 4096


@dataclass(frozen=True)
class PathSet:
    """Channel realisation. Delays in samples at ``sample_rate``."""

    delays: np.ndarray
    gains: np.ndarray
    dopplers: np.ndarray
    sample_rate: float
    nu_max: float = 0.0

    def __post_init__(self):
        d = np.asarray(self.delays, dtype=np.int64).ravel()
        g = np.asarray(self.gains, dtype=complex).ravel()
        nu = np.asarray(self.dopplers, dtype=float).ravel()
        if not d.size == g.size == nu.size or d.size == 0:
            raise ValueError("delays, gains and dopplers must be equal-length and non-empty")
        if np.any(d < 0):
            raise ValueError("path delays must be >= 0")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if np.any(np.abs(nu) > self.nu_max * (1 + 1e-12) + 1e-12):
            raise ValueError("path Doppler exceeds nu_max")
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "gains", g)
        object.__setattr__(self, "dopplers", nu)

    @property
    def L_ch(self) -> int:
        return int(self.delays.max())

    def __len__(self):
        return self.delays.size


def identity_channel(sample_rate: float) -> PathSet:
    return PathSet([0], [1.0], [0.0], sample_rate)


def max_doppler(velocity_kmh: float, carrier_hz: float) -> float:
    """nu_max = v f_c / c."""
    return velocity_kmh / 3.6 / SPEED_OF_LIGHT * carrier_hz


def eva_profile():
    """(delays_ns, powers_db) of the EVA power-delay profile."""
    raw = resources.files("ddpulse").joinpath("data/eva.json").read_text()
    spec = json.loads(raw)
    return np.array(spec["delays_ns"], dtype=float), np.array(spec["powers_db"], dtype=float)


def gen_eva(nu_max: float, sample_rate: float, rng: np.random.Generator,
            doppler: bool = True) -> PathSet:
    """One EVA realisation.

    Delays are rounded to the nearest sample. Gains are circular complex
    Gaussian with the PDP's (unit-sum) variances; each path gets a single
    Doppler nu_max cos(theta), theta ~ U[0, 2 pi).
    """
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    delays_ns, powers_db = eva_profile()
    pw = 10 ** (powers_db / 10)
    pw = pw / pw.sum()
    delays = np.rint(delays_ns * 1e-9 * sample_rate).astype(np.int64)
    gains = np.sqrt(pw / 2) * (rng.standard_normal(pw.size) + 1j * rng.standard_normal(pw.size))
    theta = rng.uniform(0, 2 * np.pi, pw.size)
    dopplers = nu_max * np.cos(theta) if doppler else np.zeros(pw.size)
    return PathSet(delays, gains, dopplers, sample_rate, nu_max)


def apply_ltv_array(x, ps: PathSet, start: int = 0) -> np.ndarray:
    """r[kappa] = sum_p h_p e^{j 2 pi nu_p kappa / fs} x[kappa - d_p].

    ``x`` is batched on leading axes; its sample i sits at index
    ``start + i``. The output is longer by L_ch.
    """
    x = np.asarray(x, dtype=complex)
    n = x.shape[-1]
    out = np.zeros(x.shape[:-1] + (n + ps.L_ch,), dtype=complex)
    kappa = start + np.arange(n + ps.L_ch)
    for d, h, nu in zip(ps.delays, ps.gains, ps.dopplers):
        tap = h * np.exp(2j * np.pi * nu * kappa[d:d + n] / ps.sample_rate)
        out[..., d:d + n] += x * tap
    return out


def apply_ltv(x: BasebandSignal, ps: PathSet) -> BasebandSignal:
    r = apply_ltv_array(x.samples.data, ps, x.samples.start)
    return replace(x, samples=ComplexVector(r, x.samples.start))


def add_awgn(x, noise_var: float, rng: np.random.Generator):
    """Add circular complex Gaussian noise with variance ``noise_var`` per sample."""
    if noise_var < 0:
        raise ValueError("noise variance must be >= 0")
    if isinstance(x, BasebandSignal):
        return replace(x, samples=ComplexVector(add_awgn(x.samples.data, noise_var, rng), x.samples.start))
    x = np.asarray(x, dtype=complex)
    if noise_var == 0:
        return x.copy()
    return x + np.sqrt(noise_var) * complex_noise(x.shape, rng)


def complex_noise(shape, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance circular complex Gaussian samples."""
    w = rng.standard_normal(tuple(shape) + (2,))
    return (w[..., 0] + 1j * w[..., 1]) / np.sqrt(2)


@dataclass(frozen=True)
class ChannelMatrix:
    """H maps row-major vec(D) to vec(D~) for a frozen PathSet."""

    H: np.ndarray
    noise_var: float = 0.0


def signal_start(cfg: ModemConfig) -> int:
    return -cfg.tail_len - cfg.cp_len


def build_effective_matrix(cfg: ModemConfig, ps: PathSet, noise_var: float = 0.0,
                           cap: int = MATRIX_CAP, chunk: int = 256) -> ChannelMatrix:
    """Probe modulate -> channel -> demodulate with each unit frame."""
    MN = cfg.M * cfg.N
    if MN > cap:
        raise ValueError(f"M N = {MN} exceeds the matrix cap {cap}")
    if ps.L_ch > cfg.cp_len:
        raise ValueError(f"channel length {ps.L_ch} exceeds the CP ({cfg.cp_len} samples)")
    H = np.empty((MN, MN), dtype=complex)
    start = signal_start(cfg)
    for cols, E in probe_chunks(cfg, chunk=chunk):
        x = modulate_array(E, cfg)
        y = demodulate_array(apply_ltv_array(x, ps, start), cfg)
        H[:, cols] = y.reshape(cols.size, MN).T
    return ChannelMatrix(H, noise_var)


def write_pathset(ps: PathSet, path) -> None:
    """CSV with per-path delay, power, phase and Doppler; header comments
    carry the sample rate and nu_max."""
    with open(Path(path), "w", newline="") as fh:
        fh.write(f"# sample_rate_hz={ps.sample_rate!r}\n# nu_max_hz={ps.nu_max!r}\n")
        w = csv.writer(fh)
        w.writerow(["delay_samples", "delay_ns", "power_db", "phase_rad", "doppler_hz"])
        for d, h, nu in zip(ps.delays, ps.gains, ps.dopplers):
            power_db = 10 * np.log10(abs(h) ** 2) if h != 0 else -np.inf
            w.writerow([int(d), repr(d / ps.sample_rate * 1e9), repr(float(power_db)),
                        repr(float(np.angle(h))), repr(float(nu))])


def read_pathset(path) -> PathSet:
    meta = {}
    rows = []
    with open(Path(path), newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key] = float(val)
            else:
                rows.append(line)
    recs = list(csv.DictReader(rows))
    delays = [int(r["delay_samples"]) for r in recs]
    gains = [10 ** (float(r["power_db"]) / 20) * np.exp(1j * float(r["phase_rad"])) for r in recs]
    dopplers = [float(r["doppler_hz"]) for r in recs]
    return PathSet(delays, gains, dopplers, meta["sample_rate_hz"], meta.get("nu_max_hz", 0.0))
