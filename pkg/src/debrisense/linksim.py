"""QPSK MIMO link simulation: modulation, AWGN, CSI estimation, ZF, BER.

The transmit convention normalizes total power across the Nt streams
(per-stream scale 1/sqrt(Nt)); SNR is defined post-channel as the average
per-receive-antenna signal-to-noise ratio for the realized channel, which
keeps SNR sweeps meaningful independent of absolute path-loss levels.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import EqualizationError, ConfigError

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

# Rank tolerance for the zero-forcing precondition.
ZF_RANK_TOL = 1e-12


class CsiMethod(enum.Enum):
    PERFECT = "perfect"
    LEAST_SQUARES = "least_squares"


@dataclass(frozen=True)
class CsiEstimate:
    matrix: np.ndarray
    method: CsiMethod
    pilot_noise_variance: float = 0.0


def qpsk_modulate(bits: np.ndarray) -> np.ndarray:
    """Gray-mapped unit-energy QPSK: bit pair (b0, b1) -> ((1-2b0)+j(1-2b1))/sqrt(2).

    The all-zeros pair maps to (1+1j)/sqrt(2); adjacent constellation
    points differ in exactly one bit.
    """
    bits = np.asarray(bits)
    if bits.size % 2 != 0:
        raise ValueError(f"bit count must be even, got {bits.size}")
    pairs = bits.reshape(-1, 2)
    return ((1.0 - 2.0 * pairs[:, 0]) + 1j * (1.0 - 2.0 * pairs[:, 1])) * _INV_SQRT2


def qpsk_demodulate(symbols: np.ndarray) -> np.ndarray:
    """Hard-decision inverse of :func:`qpsk_modulate`."""
    symbols = np.asarray(symbols).ravel()
    bits = np.empty((symbols.size, 2), dtype=np.int8)
    bits[:, 0] = symbols.real < 0
    bits[:, 1] = symbols.imag < 0
    return bits.ravel()


def noise_variance_for_snr(h: np.ndarray, snr_db: float, n_tx: int) -> float:
    """Complex noise variance giving the requested average per-antenna SNR."""
    snr_lin = 10.0 ** (snr_db / 10.0)
    gamma_sq = 1.0 / n_tx
    n_rx = h.shape[0]
    signal_power = gamma_sq * float(np.linalg.norm(h) ** 2) / n_rx
    return signal_power / snr_lin


def transmit(h: np.ndarray, frame: np.ndarray, snr_db: float,
             rng: np.random.Generator | None,
             noise_unit: np.ndarray | None = None) -> np.ndarray:
    """Send a symbol frame through y = H x / sqrt(Nt) + n.

    ``noise_unit`` may provide a pre-drawn CN(0,1) block of the output
    shape (used to share noise realizations across SNR sweeps); otherwise
    the generator supplies it.
    """
    h = np.asarray(h)
    frame = np.asarray(frame)
    n_rx, n_tx = h.shape
    if frame.ndim != 2 or frame.shape[0] != n_tx:
        raise ValueError(f"frame shape {frame.shape} does not match Nt={n_tx}")
    gamma = 1.0 / math.sqrt(n_tx)
    sigma_sq = noise_variance_for_snr(h, snr_db, n_tx)
    if noise_unit is None:
        if rng is None:
            raise ValueError("provide either rng or noise_unit")
        noise_unit = complex_normal(rng, (n_rx, frame.shape[1]))
    noise = math.sqrt(sigma_sq) * noise_unit
    return gamma * (h @ frame) + noise


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """CN(0, 1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * _INV_SQRT2


def estimate_csi(h_true: np.ndarray, pilot_length: int, snr_db: float,
                 rng: np.random.Generator | None,
                 method: CsiMethod = CsiMethod.LEAST_SQUARES,
                 error_unit: np.ndarray | None = None) -> CsiEstimate:
    """Channel estimate from an orthogonal pilot block.

    Perfect mode returns the truth.  Least-squares mode adds the exact LS
    error of an orthogonal unit-modulus pilot block of ``pilot_length``
    columns: i.i.d. complex Gaussian with per-entry variance
    sigma_n^2 / (gamma^2 * pilot_length).
    """
    h_true = np.asarray(h_true)
    n_rx, n_tx = h_true.shape
    if method is CsiMethod.PERFECT:
        return CsiEstimate(matrix=h_true.copy(), method=method)
    if pilot_length < n_tx:
        raise ConfigError(f"pilot length {pilot_length} shorter than Nt={n_tx}")
    sigma_sq = noise_variance_for_snr(h_true, snr_db, n_tx)
    err_var = sigma_sq * n_tx / pilot_length  # gamma^2 = 1/Nt
    if error_unit is None:
        if rng is None:
            raise ValueError("provide either rng or error_unit")
        error_unit = complex_normal(rng, (n_rx, n_tx))
    return CsiEstimate(matrix=h_true + math.sqrt(err_var) * error_unit,
                       method=method, pilot_noise_variance=err_var)


def zf_equalize(y: np.ndarray, csi: CsiEstimate) -> np.ndarray:
    """Zero-forcing equalization via the pseudo-inverse of the CSI matrix.

    Raises EqualizationError when the estimate is rank-deficient (smallest
    singular value below ZF_RANK_TOL of the largest); callers record such
    samples at BER 0.5 with a flag.
    """
    mat = np.asarray(csi.matrix)
    sv = np.linalg.svd(mat, compute_uv=False)
    if sv[-1] <= ZF_RANK_TOL * sv[0]:
        raise EqualizationError(
            f"CSI singular values span {sv[0]:.3e}..{sv[-1]:.3e}; "
            "zero-forcing needs full column rank")
    return np.linalg.pinv(mat) @ np.asarray(y)


def compute_ber(tx_bits: np.ndarray, rx_bits: np.ndarray) -> float:
    """Fraction of bit positions that differ."""
    tx_bits = np.asarray(tx_bits).ravel()
    rx_bits = np.asarray(rx_bits).ravel()
    if tx_bits.size != rx_bits.size:
        raise ValueError(f"bit streams differ in length: {tx_bits.size} vs {rx_bits.size}")
    if tx_bits.size == 0:
        raise ValueError("empty bit streams")
    return float(np.mean(tx_bits != rx_bits))
