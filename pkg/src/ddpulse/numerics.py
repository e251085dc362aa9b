"""Complex-vector primitives shared by the modem.

All DFTs use the unitary 1/sqrt(N) convention. Circular convolution uses
the plain (unscaled) sum ``out[m] = sum_i a[i] b[(m - i) mod P]``, which is
``ifft(fft(a) * fft(b))`` under numpy's default normalisation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft
from scipy import signal as sps

DIRECT_CONV_LIMIT = 256
# above this many multiply-adds the FFT path is used
DIRECT_CONV_WORK = 1 << 16


@dataclass(frozen=True)
class ComplexVector:
    """1-D complex samples with an explicit signed index of the first sample."""

    data: np.ndarray
    start: int = 0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim != 1 or data.size == 0:
            raise ValueError("ComplexVector needs a non-empty 1-D array")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "start", int(self.start))

    def __len__(self):
        return self.data.size

    @property
    def stop(self) -> int:
        """One past the last valid index."""
        return self.start + self.data.size

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.stop)

    def at(self, idx) -> np.ndarray:
        """Values at signed indices; zero outside the support."""
        idx = np.asarray(idx)
        pos = idx - self.start
        ok = (pos >= 0) & (pos < self.data.size)
        out = np.zeros(idx.shape, dtype=complex)
        out[ok] = self.data[pos[ok]]
        return out

    @property
    def energy(self) -> float:
        return float(np.vdot(self.data, self.data).real)


def as_grid(g) -> np.ndarray:
    """Validate a 2-D (or batched 2-D) complex grid and return it as an array."""
    g = np.asarray(g, dtype=complex)
    if g.ndim < 2 or g.shape[-1] == 0 or g.shape[-2] == 0:
        raise ValueError(f"expected a non-empty grid, got shape {g.shape}")
    if not np.all(np.isfinite(g)):
        raise ValueError("grid contains non-finite values")
    return g


def dft_along_time(g, axis: int = -1) -> np.ndarray:
    """N-point unitary DFT along the time axis (delay-time -> delay-Doppler)."""
    g = as_grid(g)
    return np.fft.fft(g, axis=axis, norm="ortho")


def idft_along_doppler(g, axis: int = -1) -> np.ndarray:
    """N-point unitary IDFT along the Doppler axis (delay-Doppler -> delay-time)."""
    g = as_grid(g)
    return np.fft.ifft(g, axis=axis, norm="ortho")


def circular_convolve(a, b, n: int | None = None, axis: int = -1, method: str = "auto") -> np.ndarray:
    """P-point circular convolution of ``a`` (along ``axis``) with kernel ``b``.

    ``b`` is 1-D. Shorter operands are zero-extended to ``n`` (default: the
    length of ``a`` along ``axis``). ``method="auto"`` evaluates the sum
    directly for a single vector of up to ``DIRECT_CONV_LIMIT`` points and
    by FFT otherwise (batched inputs included).
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex).ravel()
    a = np.moveaxis(a, axis, -1)
    P = a.shape[-1] if n is None else int(n)
    if P <= 0:
        raise ValueError("circular convolution length must be positive")
    if a.shape[-1] > P or b.size > P:
        raise ValueError("operand longer than the convolution length")
    a = _zero_extend(a, P)
    b = _zero_extend(b, P)
    if method == "auto":
        method = "direct" if P <= DIRECT_CONV_LIMIT and a.ndim == 1 else "fft"
    if method == "direct":
        out = np.zeros_like(a)
        for i in np.flatnonzero(b):
            out += b[i] * np.roll(a, i, axis=-1)
    elif method == "fft":
        out = np.fft.ifft(np.fft.fft(a, axis=-1) * np.fft.fft(b), axis=-1)
    else:
        raise ValueError(f"unknown method {method!r}")
    return np.moveaxis(out, -1, axis)


def _zero_extend(x: np.ndarray, P: int) -> np.ndarray:
    if x.shape[-1] == P:
        return x
    pad = [(0, 0)] * (x.ndim - 1) + [(0, P - x.shape[-1])]
    return np.pad(x, pad)


def convolve_axis(x, taps, axis: int = -1) -> np.ndarray:
    """Full linear convolution of ``x`` along ``axis`` with 1-D ``taps``.

    ``taps`` may also be 2-D with shape ``(T, *bcast)`` where the trailing
    dimensions broadcast against ``x`` with ``axis`` removed; that is how
    per-column kernels are applied.
    """
    x = np.moveaxis(np.asarray(x, dtype=complex), axis, 0)
    taps = np.asarray(taps, dtype=complex)
    L, T = x.shape[0], taps.shape[0]
    bshape = np.broadcast_shapes(x.shape[1:], taps.shape[1:])
    if max(L, T) <= DIRECT_CONV_LIMIT and x.size * T <= DIRECT_CONV_WORK:
        out = np.zeros((L + T - 1,) + bshape, dtype=complex)
        for j in range(T):
            out[j:j + L] += x * taps[j]
    else:
        n = sp_fft.next_fast_len(L + T - 1)
        k = taps.reshape((T,) + (1,) * (x.ndim - 1 - (taps.ndim - 1)) + taps.shape[1:])
        out = sp_fft.ifft(sp_fft.fft(x, n, axis=0) * sp_fft.fft(k, n, axis=0), axis=0)[:L + T - 1]
        if out.shape[1:] != bshape:
            out = np.broadcast_to(out, (L + T - 1,) + bshape).copy()
    return np.moveaxis(out, 0, axis)


def linear_convolve(a, b) -> ComplexVector:
    """Full linear convolution; start indices add."""
    a = a if isinstance(a, ComplexVector) else ComplexVector(a)
    b = b if isinstance(b, ComplexVector) else ComplexVector(b)
    return ComplexVector(convolve_axis(a.data, b.data), a.start + b.start)


def upsample(v, factor: int, axis: int = -1) -> np.ndarray:
    """Zero-insertion expansion: ``out[i*L] = v[i]``, zeros elsewhere."""
    if factor < 1:
        raise ValueError("upsampling factor must be >= 1")
    v = np.moveaxis(np.asarray(v, dtype=complex), axis, -1)
    out = np.zeros(v.shape[:-1] + (v.shape[-1] * factor,), dtype=complex)
    out[..., ::factor] = v
    return np.moveaxis(out, -1, axis)


def downsample(v, factor: int, phase: int = 0, axis: int = -1) -> np.ndarray:
    """Keep every ``factor``-th sample starting at ``phase``."""
    if factor < 1:
        raise ValueError("downsampling factor must be >= 1")
    if not 0 <= phase < factor:
        raise ValueError(f"phase {phase} outside [0, {factor})")
    v = np.moveaxis(np.asarray(v), axis, -1)
    return np.moveaxis(v[..., phase::factor], -1, axis)


def welch_psd(x, sample_rate: float = 1.0, segment_len: int = 1024,
              overlap: float = 0.5, window="hann"):
    """Two-sided Welch PSD, peak-normalised to 0 dB.

    Returns ``(freq_hz, psd_db)`` with frequencies ascending from
    -fs/2 to fs/2.
    """
    x = x.data if isinstance(x, ComplexVector) else np.asarray(x, dtype=complex)
    x = np.ravel(x)
    if segment_len > x.size:
        raise ValueError(f"segment_len {segment_len} exceeds signal length {x.size}")
    if not 0 <= overlap < 1:
        raise ValueError("overlap must be in [0, 1)")
    f, pxx = sps.welch(x, fs=sample_rate, window=window, nperseg=segment_len,
                       noverlap=int(round(overlap * segment_len)),
                       detrend=False, return_onesided=False, scaling="density")
    f = np.fft.fftshift(f)
    pxx = np.fft.fftshift(pxx)
    tiny = np.finfo(float).tiny
    psd_db = 10 * np.log10(np.maximum(pxx, tiny))
    return f, psd_db - psd_db.max()
