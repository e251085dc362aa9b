"""Delay-dimension pulses: truncated RRC/sinc taps, frequency-sampled
circular pulses, the zero-order-hold rectangle, and per-Doppler modulated
pulses for ODDM.

Time is measured in delay-symbol periods; one period spans ``L_us`` taps.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .numerics import ComplexVector, convolve_axis

FAMILIES = ("rrc", "sinc", "rect")
MODES = ("linear_taps", "circular_freq_sampled")

# |t - t_sing| below this (in symbol periods) uses the analytic limit.
SINGULARITY_TOL = 1e-9


@dataclass(frozen=True)
class PulseSpec:
    family: str = "rrc"
    rolloff: float = 0.1
    Q: int = 8
    L_us: int = 2
    mode: str = "linear_taps"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown pulse family {self.family!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown pulse mode {self.mode!r}")
        if not 0.0 <= self.rolloff <= 1.0:
            raise ValueError(f"rolloff {self.rolloff} outside [0, 1]")
        if self.Q < 1:
            raise ValueError("Q must be >= 1")
        if self.L_us < 1:
            raise ValueError("L_us must be >= 1")


@dataclass(frozen=True)
class Pulse:
    """Pulse taps on a signed index axis.

    Linear pulses carry ``start = -Q'`` (or 0 for the causal rectangle).
    Circular pulses have ``start = 0`` and length M'; their indices are
    taken modulo M'.
    """

    taps: np.ndarray
    start: int
    family: str
    mode: str
    L_us: int

    def __post_init__(self):
        object.__setattr__(self, "taps", np.asarray(self.taps, dtype=complex))

    @property
    def circular(self) -> bool:
        return self.mode == "circular_freq_sampled"

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.taps) ** 2))

    @property
    def vector(self) -> ComplexVector:
        return ComplexVector(self.taps, self.start)

    def matched(self) -> "Pulse":
        """Matched filter p*[-l']."""
        if self.circular:
            mf = np.conj(np.roll(self.taps[::-1], 1))
            return Pulse(mf, 0, self.family, self.mode, self.L_us)
        stop = self.start + self.taps.size
        return Pulse(np.conj(self.taps[::-1]), -(stop - 1), self.family, self.mode, self.L_us)


@dataclass(frozen=True)
class ModulatedPulse:
    """p_k[l'] = p[l'] exp(j 2 pi k l' / (N M'))."""

    base: Pulse
    doppler_index: int
    N: int
    M_us: int
    taps: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        idx = np.arange(self.base.taps.size) + self.base.start
        ramp = np.exp(2j * np.pi * self.doppler_index * idx / (self.N * self.M_us))
        object.__setattr__(self, "taps", self.base.taps * ramp)

    @property
    def start(self) -> int:
        return self.base.start

    @property
    def vector(self) -> ComplexVector:
        return ComplexVector(self.taps, self.start)


@dataclass(frozen=True)
class NyquistReport:
    is_nyquist: bool
    worst_leakage: float
    total_leakage: float


def rrc_impulse(t, beta: float) -> np.ndarray:
    """Continuous root-raised-cosine impulse response (unit symbol period).

    Removable singularities at t = 0 and t = +-1/(4 beta) use their limits.
    """
    t = np.asarray(t, dtype=float)
    h = np.empty_like(t)
    if beta == 0.0:
        return np.sinc(t)
    at_zero = np.abs(t) < SINGULARITY_TOL
    at_sing = np.abs(np.abs(t) - 1.0 / (4.0 * beta)) < SINGULARITY_TOL
    regular = ~(at_zero | at_sing)
    tr = t[regular]
    num = np.sin(np.pi * tr * (1 - beta)) + 4 * beta * tr * np.cos(np.pi * tr * (1 + beta))
    den = np.pi * tr * (1 - (4 * beta * tr) ** 2)
    h[regular] = num / den
    h[at_zero] = 1.0 - beta + 4.0 * beta / np.pi
    if at_sing.any():
        h[at_sing] = (beta / np.sqrt(2.0)) * (
            (1 + 2 / np.pi) * np.sin(np.pi / (4 * beta))
            + (1 - 2 / np.pi) * np.cos(np.pi / (4 * beta))
        )
    return h


def raised_cosine_spectrum(f, beta: float) -> np.ndarray:
    """Raised-cosine spectrum, unit passband gain, f in units of the symbol rate."""
    f = np.abs(np.asarray(f, dtype=float))
    lo, hi = (1 - beta) / 2, (1 + beta) / 2
    out = np.where(f <= lo, 1.0, 0.0)
    if beta > 0:
        roll = (f > lo) & (f <= hi)
        out = np.where(roll, 0.5 * (1 + np.cos(np.pi / beta * (f - lo))), out)
    elif np.any(f == 0.5):
        out = np.where(f == 0.5, 0.5, out)
    return out


def design_rrc(rolloff: float, L_us: int, Q: int) -> Pulse:
    """RRC sampled at 1/L_us symbol spacing, hard-truncated to +-Q periods."""
    if not 0.0 <= rolloff <= 1.0:
        raise ValueError(f"rolloff {rolloff} outside [0, 1]")
    if Q < 1 or L_us < 1:
        raise ValueError("Q and L_us must be >= 1")
    Qp = Q * L_us
    idx = np.arange(-Qp, Qp + 1)
    taps = rrc_impulse(idx / L_us, rolloff)
    taps = taps / np.linalg.norm(taps)
    return Pulse(taps, -Qp, "sinc" if rolloff == 0 else "rrc", "linear_taps", L_us)


def design_sinc(L_us: int, Q: int) -> Pulse:
    return design_rrc(0.0, L_us, Q)


def design_rect(L_us: int) -> Pulse:
    """Zero-order-hold interpolator: L_us ones starting at index 0."""
    return Pulse(np.ones(L_us) / np.sqrt(L_us), 0, "rect", "linear_taps", L_us)


def circular_frequency_response(spec: PulseSpec, M_us: int) -> np.ndarray:
    """Sampled frequency response H[m] (numpy bin order) of a circular pulse.

    The raised cosine is periodised over M' bins before the square root, so
    the alias sum of |H|^2 over the M-bin period is exactly L_us and the
    matched cascade is Nyquist. For beta = 0 the two band-edge bins get
    1/sqrt(2) of the passband amplitude, which keeps the taps real and even.
    """
    L_us = spec.L_us
    if M_us % L_us:
        raise ValueError(f"M' = {M_us} not divisible by L_us = {L_us}")
    M = M_us // L_us
    m = np.fft.fftfreq(M_us, d=1.0 / M_us)
    if spec.family == "rect":
        box = np.zeros(M_us)
        box[:L_us] = 1.0 / np.sqrt(L_us)
        return np.fft.fft(box)
    beta = 0.0 if spec.family == "sinc" else spec.rolloff
    reach = int(np.ceil((1 + beta) / 2 * M / M_us)) + 1
    rc = sum(raised_cosine_spectrum((m + r * M_us) / M, beta) for r in range(-reach, reach + 1))
    return np.sqrt(L_us * rc)


def design_circular(spec: PulseSpec, M_us: int) -> Pulse:
    """Length-M' pulse defined by frequency sampling, unit energy."""
    H = circular_frequency_response(spec, M_us)
    taps = np.fft.ifft(H)
    if spec.family != "rect":
        taps = taps.real.astype(complex)
    taps = taps / np.linalg.norm(taps)
    return Pulse(taps, 0, spec.family, "circular_freq_sampled", spec.L_us)


def design_pulse(spec: PulseSpec, M_us: int | None = None) -> Pulse:
    """Dispatch on ``spec.mode`` and ``spec.family``."""
    if spec.mode == "circular_freq_sampled":
        if M_us is None:
            raise ValueError("circular pulses need M'")
        return design_circular(spec, M_us)
    if spec.family == "rect":
        return design_rect(spec.L_us)
    if spec.family == "sinc":
        return design_sinc(spec.L_us, spec.Q)
    return design_rrc(spec.rolloff, spec.L_us, spec.Q)


def modulate_pulse(p: Pulse, k: int, N: int, M_us: int) -> ModulatedPulse:
    if not 0 <= k < N:
        raise ValueError(f"Doppler index {k} outside [0, {N})")
    return ModulatedPulse(p, k, N, M_us)


def check_nyquist(p: Pulse, L_us: int, tol: float = 1e-3) -> NyquistReport:
    """Leakage of the matched cascade p * p~ at nonzero multiples of L_us."""
    if p.circular:
        raise ValueError("check_nyquist expects a linear-mode pulse")
    mf = p.matched()
    g = convolve_axis(p.taps, mf.taps)
    g_start = p.start + mf.start
    centre = g[-g_start]
    idx = np.arange(g.size) + g_start
    off = (idx % L_us == 0) & (idx != 0)
    leak = np.abs(g[off]) / np.abs(centre)
    worst = float(leak.max()) if leak.size else 0.0
    return NyquistReport(worst <= tol, worst, float(leak.sum()))


def write_pulse_csv(p, path) -> None:
    """Write ``index,real,imag`` rows for a Pulse or ModulatedPulse."""
    idx = np.arange(p.taps.size) + p.start
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "real", "imag"])
        for i, v in zip(idx, p.taps):
            w.writerow([int(i), repr(float(v.real)), repr(float(v.imag))])


def read_pulse_csv(path) -> ComplexVector:
    with open(Path(path), newline="") as fh:
        rows = list(csv.DictReader(fh))
    idx = np.array([int(r["index"]) for r in rows])
    vals = np.array([float(r["real"]) + 1j * float(r["imag"]) for r in rows])
    if np.any(np.diff(idx) != 1):
        raise ValueError("pulse CSV indices must be contiguous and ascending")
    return ComplexVector(vals, int(idx[0]))
