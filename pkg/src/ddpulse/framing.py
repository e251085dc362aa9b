"""Frame assembly: QAM mapping, zero guards, overlap-add serialisation and
cyclic prefix handling."""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .numerics import ComplexVector

QAM_ORDERS = (4, 16)


# --- QAM -------------------------------------------------------------------

def _pam_levels(bits_per_axis: int):
    """Gray-labelled PAM levels (unnormalised, odd integers) indexed by label."""
    if bits_per_axis == 1:
        return np.array([1.0, -1.0])
    # labels 00, 01, 10, 11 -> +1, +3, -1, -3
    return np.array([1.0, 3.0, -1.0, -3.0])


def _qam_scale(order: int) -> float:
    return {4: np.sqrt(2.0), 16: np.sqrt(10.0)}[order]


def bits_per_symbol(order: int) -> int:
    if order not in QAM_ORDERS:
        raise ValueError(f"unsupported QAM order {order}")
    return int(np.log2(order))


def constellation(order: int) -> np.ndarray:
    """All points indexed by their integer Gray label (I bits are the MSBs)."""
    b = bits_per_symbol(order)
    labels = np.arange(order)
    bits = (labels[:, None] >> np.arange(b - 1, -1, -1)) & 1
    return qam_map(bits.ravel(), order)


def qam_map(bits, order: int) -> np.ndarray:
    """Gray-coded square QAM with unit average energy.

    The first half of each symbol's bits selects the in-phase level, the
    second half the quadrature level.
    """
    b = bits_per_symbol(order)
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size % b:
        raise ValueError(f"bit count {bits.size} not divisible by {b}")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    h = b // 2
    groups = bits.reshape(-1, b)
    weights = 1 << np.arange(h - 1, -1, -1)
    i_lab = groups[:, :h] @ weights
    q_lab = groups[:, h:] @ weights
    levels = _pam_levels(h)
    return (levels[i_lab] + 1j * levels[q_lab]) / _qam_scale(order)


def _pam_decide(x: np.ndarray, bits_per_axis: int) -> np.ndarray:
    """Label of the nearest level; ties go to the smaller label."""
    if bits_per_axis == 1:
        return (x < 0).astype(np.int64)
    # levels by label: 0:+1 1:+3 2:-1 3:-3; boundaries at -2, 0, +2
    return np.where(x >= 0, np.where(x > 2, 1, 0), np.where(x < -2, 3, 2))


def qam_demap(symbols, order: int) -> np.ndarray:
    """Hard-decision nearest-point demapping back to bits."""
    b = bits_per_symbol(order)
    h = b // 2
    s = np.asarray(symbols, dtype=complex).ravel() * _qam_scale(order)
    i_lab = _pam_decide(s.real, h)
    q_lab = _pam_decide(s.imag, h)
    shifts = np.arange(h - 1, -1, -1)
    i_bits = (i_lab[:, None] >> shifts) & 1
    q_bits = (q_lab[:, None] >> shifts) & 1
    return np.concatenate([i_bits, q_bits], axis=1).ravel()


# --- frames ----------------------------------------------------------------

@dataclass(frozen=True)
class GridGeometry:
    M: int
    N: int
    L_us: int
    delta_f: float = 15e3

    @property
    def T(self) -> float:
        return 1.0 / self.delta_f

    @property
    def delta_tau(self) -> float:
        return self.T / self.M

    @property
    def delta_nu(self) -> float:
        return 1.0 / (self.N * self.T)

    @property
    def sample_rate(self) -> float:
        return self.M * self.L_us * self.delta_f


@dataclass(frozen=True)
class DelayDopplerFrame:
    """M x N symbol grid D[l, k] with ``zg_per_edge`` zeroed delay rows at each edge."""

    symbols: np.ndarray
    zg_per_edge: int = 0

    def __post_init__(self):
        D = np.asarray(self.symbols, dtype=complex)
        if D.ndim != 2 or D.size == 0:
            raise ValueError(f"frame must be a non-empty M x N grid, got {D.shape}")
        g = self.zg_per_edge
        if g < 0 or 2 * g >= D.shape[0]:
            raise ValueError(f"zg_per_edge={g} leaves no data rows for M={D.shape[0]}")
        if g and (np.any(D[:g]) or np.any(D[D.shape[0] - g:])):
            raise ValueError("guard rows must be zero")
        object.__setattr__(self, "symbols", D)

    @property
    def M(self) -> int:
        return self.symbols.shape[0]

    @property
    def N(self) -> int:
        return self.symbols.shape[1]

    @property
    def data_rows(self) -> slice:
        return slice(self.zg_per_edge, self.M - self.zg_per_edge)

    def data(self) -> np.ndarray:
        """Data symbols in row-major (l, k) order, guard rows skipped."""
        return self.symbols[self.data_rows].ravel()


def data_mask(M: int, N: int, g: int) -> np.ndarray:
    """Boolean M x N mask of data positions."""
    if 2 * g >= M:
        raise ValueError(f"2g = {2 * g} must be < M = {M}")
    mask = np.zeros((M, N), dtype=bool)
    mask[g:M - g] = True
    return mask


def frame_from_symbols(symbols, M: int, N: int, g: int = 0) -> DelayDopplerFrame:
    """Place a stream of (M - 2g) N symbols into the data rows."""
    symbols = np.asarray(symbols, dtype=complex).ravel()
    mask = data_mask(M, N, g)
    if symbols.size != mask.sum():
        raise ValueError(f"need {mask.sum()} symbols, got {symbols.size}")
    D = np.zeros((M, N), dtype=complex)
    D[mask] = symbols
    return DelayDopplerFrame(D, g)


def insert_zero_guards(frame: DelayDopplerFrame, g: int, renormalize: bool = True) -> DelayDopplerFrame:
    """Zero the first and last ``g`` delay rows.

    With ``renormalize`` the remaining rows are scaled to unit mean energy.
    Pass ``renormalize=False`` to keep exact constellation points.
    """
    if 2 * g >= frame.M:
        raise ValueError(f"2g = {2 * g} must be < M = {frame.M}")
    D = frame.symbols.copy()
    D[:g] = 0
    D[frame.M - g:] = 0
    if renormalize:
        rows = D[g:frame.M - g]
        e = np.mean(np.abs(rows) ** 2)
        if e > 0:
            D[g:frame.M - g] = rows / np.sqrt(e)
    return DelayDopplerFrame(D, g)


def guard_overhead(M: int, g: int) -> float:
    return 2 * g / M


def write_frame_csv(frame: DelayDopplerFrame, path) -> None:
    D = frame.symbols
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["l", "k", "real", "imag"])
        for l in range(D.shape[0]):
            for k in range(D.shape[1]):
                w.writerow([l, k, repr(float(D[l, k].real)), repr(float(D[l, k].imag))])


def read_frame_csv(path, zg_per_edge: int = 0) -> DelayDopplerFrame:
    with open(Path(path), newline="") as fh:
        rows = list(csv.DictReader(fh))
    l = np.array([int(r["l"]) for r in rows])
    k = np.array([int(r["k"]) for r in rows])
    D = np.zeros((l.max() + 1, k.max() + 1), dtype=complex)
    D[l, k] = [float(r["real"]) + 1j * float(r["imag"]) for r in rows]
    return DelayDopplerFrame(D, zg_per_edge)


# --- serialisation ---------------------------------------------------------

@dataclass(frozen=True)
class BasebandSignal:
    """Sample stream on the kappa' axis.

    ``samples.start`` is the index of the first transmitted sample; the body
    (without CP) runs from ``-tail_len`` to ``M'N + tail_len - 1``.
    """

    samples: ComplexVector
    sample_rate: float
    cp_len: int = 0
    tail_len: int = 0

    @property
    def body(self) -> ComplexVector:
        return ComplexVector(self.samples.data[self.cp_len:], self.samples.start + self.cp_len)

    @property
    def energy(self) -> float:
        return self.samples.energy


def serialize_overlap_add(columns, stride: int, start: int = 0) -> ComplexVector:
    """x[kappa'] = sum_n col_n[kappa' - n stride].

    ``columns`` has shape (..., W, N): column n holds local indices
    ``start .. start + W - 1``. Batched leading axes are supported when the
    result is taken as a raw array via ``overlap_add``.
    """
    data = overlap_add(columns, stride)
    if data.ndim != 1:
        raise ValueError("use overlap_add for batched grids")
    return ComplexVector(data, start)


def overlap_add(columns, stride: int) -> np.ndarray:
    cols = np.asarray(columns, dtype=complex)
    W, N = cols.shape[-2], cols.shape[-1]
    out = np.zeros(cols.shape[:-2] + ((N - 1) * stride + W,), dtype=complex)
    if W == stride:
        out[...] = np.swapaxes(cols, -1, -2).reshape(out.shape)
        return out
    for n in range(N):
        out[..., n * stride:n * stride + W] += cols[..., :, n]
    return out


def deserialize(v, stride: int, N: int, tail: int = 0) -> np.ndarray:
    """Column n = v[n stride - tail ... n stride + stride + tail - 1].

    ``v`` is a ComplexVector starting at ``-tail`` or a raw array (batched
    on leading axes) whose first sample sits at ``-tail``. Adjacent columns
    share 2*tail samples.
    """
    data = v.data if isinstance(v, ComplexVector) else np.asarray(v, dtype=complex)
    need = N * stride + 2 * tail
    if data.shape[-1] != need:
        raise ValueError(f"signal length {data.shape[-1]} != N M' + 2 tail = {need}")
    W = stride + 2 * tail
    if tail == 0:
        return np.swapaxes(data.reshape(data.shape[:-1] + (N, stride)), -1, -2)
    idx = np.arange(W)[:, None] + stride * np.arange(N)[None, :]
    return data[..., idx]


def write_signal_csv(s: BasebandSignal, path) -> None:
    """``index,real,imag`` rows; header comments carry rate, CP and tail."""
    v = s.samples
    with open(Path(path), "w", newline="") as fh:
        fh.write(f"# sample_rate_hz={s.sample_rate!r}\n# cp_len={s.cp_len}\n# tail_len={s.tail_len}\n")
        w = csv.writer(fh)
        w.writerow(["index", "real", "imag"])
        for i, x in zip(v.indices, v.data):
            w.writerow([int(i), repr(float(x.real)), repr(float(x.imag))])


def read_signal_csv(path) -> BasebandSignal:
    meta, rows = {}, []
    with open(Path(path), newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key] = val
            else:
                rows.append(line)
    recs = list(csv.DictReader(rows))
    idx = [int(r["index"]) for r in recs]
    data = [float(r["real"]) + 1j * float(r["imag"]) for r in recs]
    return BasebandSignal(ComplexVector(data, idx[0]), float(meta["sample_rate_hz"]),
                          int(meta.get("cp_len", 0)), int(meta.get("tail_len", 0)))


def add_cp(s: BasebandSignal, cp_len: int) -> BasebandSignal:
    """Prepend a copy of the last ``cp_len`` samples of the assembled stream."""
    body = s.samples.data
    if cp_len < 0 or cp_len > body.size:
        raise ValueError(f"CP length {cp_len} invalid for body of {body.size} samples")
    data = np.concatenate([body[body.size - cp_len:], body])
    return replace(s, samples=ComplexVector(data, s.samples.start - cp_len), cp_len=s.cp_len + cp_len)


def remove_cp(s: BasebandSignal, cp_len: int | None = None) -> BasebandSignal:
    """Drop exactly ``cp_len`` leading samples (default: the recorded CP)."""
    cp_len = s.cp_len if cp_len is None else cp_len
    if cp_len > len(s.samples):
        raise ValueError("CP longer than the signal")
    data = s.samples.data[cp_len:]
    return replace(s, samples=ComplexVector(data, s.samples.start + cp_len),
                   cp_len=max(s.cp_len - cp_len, 0))


def add_cp_array(x: np.ndarray, cp_len: int) -> np.ndarray:
    """Batched CP insertion along the last axis."""
    if cp_len == 0:
        return x
    return np.concatenate([x[..., x.shape[-1] - cp_len:], x], axis=-1)
