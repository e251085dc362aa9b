"""Linear MMSE detection in the delay-Doppler domain with perfect CSI."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .channel import ChannelMatrix

# added to the noise variance so the sigma^2 -> 0 limit stays factorable
REG_FLOOR = 1e-12


class SingularChannelError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class EqualizerOutput:
    estimates: np.ndarray
    residual_mse: float


class MMSEEqualizer:
    """Factorised MMSE filter for one channel matrix and noise level.

    ``H`` may be tall (more observations than unknowns), e.g. when guard
    positions are dropped from the unknowns. The factorisation is reused
    across any number of received vectors.
    """

    def __init__(self, H, noise_var: float, gram=None):
        H = np.asarray(H, dtype=complex)
        if H.ndim != 2 or H.shape[0] < H.shape[1]:
            raise ValueError(f"H must be 2-D with rows >= cols, got {H.shape}")
        if noise_var < 0:
            raise ValueError("noise variance must be >= 0")
        self.H = H
        self.noise_var = float(noise_var)
        self._gain = None
        K = H.shape[1]
        G = H.conj().T @ H if gram is None else np.array(gram, dtype=complex)
        if noise_var == 0:
            # zero-forcing limit: only allowed for full column rank
            s = np.linalg.svd(H, compute_uv=False)
            if s[-1] <= s[0] * K * np.finfo(float).eps:
                raise SingularChannelError("rank-deficient H with zero noise variance")
            self._qr = linalg.qr(H, mode="economic")
            self._chol = None
        else:
            G[np.diag_indices(K)] += noise_var + REG_FLOOR
            self._chol = linalg.cho_factor(G, lower=True, check_finite=False)
            self._qr = None

    def _solve_normal(self, rhs):
        if self._chol is not None:
            return linalg.cho_solve(self._chol, rhs, check_finite=False)
        Q, R = self._qr
        return linalg.solve_triangular(R, linalg.solve_triangular(R, rhs, trans="C"))

    def gain_diagonal(self) -> np.ndarray:
        """diag(W H) with W the MMSE filter; 1 in the zero-forcing limit."""
        if self._chol is None:
            return np.ones(self.H.shape[1])
        if self._gain is None:
            WH = self._solve_normal(self.H.conj().T @ self.H)
            self._gain = np.real(np.diag(WH))
        return self._gain

    def residual_mse(self) -> float:
        if self._chol is None:
            return 0.0
        K = self.H.shape[1]
        inv_diag = np.diag(self._solve_normal(np.eye(K)))
        return float(self.noise_var * np.real(inv_diag).mean())

    def __call__(self, y, unbiased: bool = False) -> np.ndarray:
        """Estimates for ``y`` of shape (rows,) or (rows, batch)."""
        y = np.asarray(y, dtype=complex)
        if self._qr is not None:
            Q, R = self._qr
            est = linalg.solve_triangular(R, Q.conj().T @ y)
        else:
            est = self._solve_normal(self.H.conj().T @ y)
        if unbiased:
            g = self.gain_diagonal()
            est = est / (g[:, None] if est.ndim == 2 else g)
        return est


def mmse_equalize(y, H, noise_var: float, unbiased: bool = False) -> EqualizerOutput:
    """D^ = (H^H H + sigma^2 I)^{-1} H^H y via Cholesky (QR when sigma^2 = 0)."""
    if isinstance(H, ChannelMatrix):
        H = H.H
    eq = MMSEEqualizer(H, noise_var)
    return EqualizerOutput(eq(y, unbiased=unbiased), eq.residual_mse())
