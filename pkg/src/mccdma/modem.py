"""Bit/symbol mapping for Gray-labeled QPSK and 16QAM at unit average energy.

Sign convention for soft outputs: a positive LLR means bit 0 is more
likely, matching the mapping rule that a 0 sign bit selects the positive
half-axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Gray sequence of the 4 amplitude levels per axis, indexed by the two
# bits (sign, magnitude) packed as an integer: 00->+3, 01->+1, 11->-1, 10->-3.
_QAM16_LEVELS = np.zeros(4)
_QAM16_LEVELS[0b00] = 3.0
_QAM16_LEVELS[0b01] = 1.0
_QAM16_LEVELS[0b11] = -1.0
_QAM16_LEVELS[0b10] = -3.0


@dataclass(frozen=True)
class Constellation:
    """Gray-labeled constellation with unit average symbol energy.

    `points[i]` is the symbol whose label is the bits of `i`, most
    significant bit first.
    """

    name: str
    bits_per_symbol: int
    points: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return 1 << self.bits_per_symbol

    def labels(self) -> np.ndarray:
        """Bit labels as an (order, bits_per_symbol) 0/1 array."""
        idx = np.arange(self.order)
        shifts = np.arange(self.bits_per_symbol - 1, -1, -1)
        return (idx[:, None] >> shifts[None, :]) & 1


def make_constellation(name: str) -> Constellation:
    """Build the constellation selected by the `modulation` config key."""
    key = name.lower()
    if key == "qpsk":
        points = np.empty(4, dtype=complex)
        for i in range(4):
            b0, b1 = (i >> 1) & 1, i & 1
            points[i] = ((1 - 2 * b0) + 1j * (1 - 2 * b1)) / np.sqrt(2)
        return Constellation("qpsk", 2, points)
    if key == "16qam":
        points = np.empty(16, dtype=complex)
        for i in range(16):
            b0, b1, b2, b3 = (i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1
            re = _QAM16_LEVELS[(b0 << 1) | b2]
            im = _QAM16_LEVELS[(b1 << 1) | b3]
            points[i] = (re + 1j * im) / np.sqrt(10)
        return Constellation("16qam", 4, points)
    raise ValueError(f"unknown modulation {name!r} (expected 'qpsk' or '16qam')")


def map_bits(bits: np.ndarray, constellation: Constellation) -> np.ndarray:
    """Map a flat 0/1 array to symbols, bits_per_symbol bits each, MSB first."""
    bits = np.asarray(bits)
    m = constellation.bits_per_symbol
    if bits.size % m != 0:
        raise ValueError(f"bit count {bits.size} not divisible by {m}")
    groups = bits.reshape(-1, m)
    weights = 1 << np.arange(m - 1, -1, -1)
    idx = groups @ weights
    return constellation.points[idx]


def demap_hard(estimates: np.ndarray, rho, constellation: Constellation) -> np.ndarray:
    """Nearest-point decision on rho-corrected estimates.

    `rho` is the bias-correction factor of the linear detector (1 for
    zero forcing); it may be a scalar or per-symbol array. Returns a flat
    bit array of length len(estimates) * bits_per_symbol.
    """
    y = np.asarray(estimates).ravel() * np.asarray(rho, dtype=float).ravel()
    d2 = np.abs(y[:, None] - constellation.points[None, :]) ** 2
    idx = np.argmin(d2, axis=1)
    return constellation.labels()[idx].ravel()


def demap_soft(
    estimates: np.ndarray,
    rho,
    noise_variance,
    constellation: Constellation,
) -> np.ndarray:
    """Max-log LLRs for each bit of each rho-corrected symbol estimate.

    Parameters
    ----------
    estimates : complex ndarray
        Detector outputs, one per symbol.
    rho : float or ndarray
        Detector bias correction applied to the estimate before the
        distance computation.
    noise_variance : float or ndarray
        Effective complex-noise variance after the correction; may be
        per symbol.

    Returns
    -------
    ndarray, shape (len(estimates) * bits_per_symbol,)
        LLRs ordered symbol-major, MSB first; positive favors bit 0.
    """
    noise_variance = np.asarray(noise_variance, dtype=float)
    if np.any(noise_variance <= 0):
        raise ValueError("noise_variance must be positive")
    y = np.asarray(estimates).ravel() * np.asarray(rho, dtype=float).ravel()
    d2 = np.abs(y[:, None] - constellation.points[None, :]) ** 2
    labels = constellation.labels()
    m = constellation.bits_per_symbol
    llrs = np.empty((y.size, m))
    for b in range(m):
        zero_set = labels[:, b] == 0
        d_zero = d2[:, zero_set].min(axis=1)
        d_one = d2[:, ~zero_set].min(axis=1)
        llrs[:, b] = d_one - d_zero
    llrs /= np.broadcast_to(noise_variance.ravel(), (y.size,))[:, None]
    return llrs.ravel()
