"""Per-subcarrier Alamouti space-time coding and linear single-user detection.

The encoder sends (s1, s2) from the two antennas over two consecutive
slots with a 1/sqrt(2) amplitude on each antenna so the total transmit
power stays unitary. The receive side combines the per-antenna slot pairs
with one complex coefficient per (transmit antenna, receive antenna,
subcarrier); zero-forcing and MMSE differ only in the regularization term
1/gamma of the coefficient denominator. Knowledge of the other users'
codes is never needed.

Detection assumes the channel is constant over the two slots of a pair;
callers equalize with a single channel sample per pair (the midpoint in
this package) while the true, possibly time-varying channel acts on each
slot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

#: Below this combined channel energy a zero-forcing coefficient is zeroed
#: instead of amplifying noise without bound.
DEGENERATE_ENERGY = 1e-30


def alamouti_encode(s1: np.ndarray, s2: np.ndarray) -> np.ndarray:
    """Encode two chip vectors onto two antennas and two slots.

    Returns an array shaped (2 antennas, 2 slots, ...): antenna 0 carries
    (s1, -conj(s2)), antenna 1 carries (s2, conj(s1)), both scaled by
    1/sqrt(2).
    """
    s1 = np.asarray(s1, dtype=complex)
    s2 = np.asarray(s2, dtype=complex)
    if s1.shape != s2.shape:
        raise ValueError(f"shape mismatch: {s1.shape} vs {s2.shape}")
    out = np.empty((2, 2) + s1.shape, dtype=complex)
    out[0, 0] = s1
    out[0, 1] = -np.conj(s2)
    out[1, 0] = s2
    out[1, 1] = np.conj(s1)
    out /= math.sqrt(2.0)
    return out


@dataclass
class EqualizerBank:
    """Per-subcarrier detection coefficients for one channel snapshot.

    Attributes
    ----------
    coefficients : ndarray, shape (nt, nr, ...)
        One complex coefficient per antenna pair and grid cell.
    channel_energy : ndarray, shape (...)
        Combined channel energy per cell, summed over antenna pairs.
    inv_gamma : float
        Regularization term; 0 for zero forcing or an infinite SNR
        estimate.
    degenerate_cells : int
        Number of cells whose coefficients were zeroed by the
        near-singular guard.
    """

    mode: str
    coefficients: np.ndarray = field(repr=False)
    channel_energy: np.ndarray = field(repr=False)
    inv_gamma: float
    degenerate_cells: int = 0

    def bias_weights(self) -> np.ndarray:
        """Per-cell signal scaling A/(A + 1/gamma) left by the detector."""
        a = self.channel_energy
        lam = np.zeros_like(a)
        np.divide(a, a + self.inv_gamma, out=lam, where=a > DEGENERATE_ENERGY)
        return lam

    def noise_gain(self) -> np.ndarray:
        """Per-cell sum of |coefficient|^2 over antenna pairs."""
        return np.sum(np.abs(self.coefficients) ** 2, axis=(0, 1))


def compute_equalizer(
    h: np.ndarray, mode: str, gamma: float | None = None
) -> EqualizerBank:
    """Build detection coefficients h*/(sum |h|^2 + 1/gamma).

    Parameters
    ----------
    h : ndarray, shape (nt, nr, ...)
        Channel frequency response per antenna pair and grid cell.
    mode : {"zf", "mmse"}
    gamma : float, optional
        SNR estimate, required (and > 0) in MMSE mode; `math.inf` makes
        MMSE coincide with zero forcing.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim < 2:
        raise ValueError("channel array must be shaped (nt, nr, ...)")
    if not np.all(np.isfinite(h)):
        raise ValueError("channel response contains non-finite values")
    mode = mode.lower()
    if mode == "zf":
        inv_gamma = 0.0
    elif mode == "mmse":
        if gamma is None or not gamma > 0:
            raise ValueError("MMSE mode needs gamma > 0")
        inv_gamma = 0.0 if math.isinf(gamma) else 1.0 / gamma
    else:
        raise ValueError(f"unknown detector mode {mode!r}")

    energy = np.sum(np.abs(h) ** 2, axis=(0, 1))
    denom = energy + inv_gamma
    degenerate = denom <= DEGENERATE_ENERGY
    safe = np.where(degenerate, 1.0, denom)
    coeffs = np.conj(h) / safe
    if np.any(degenerate):
        coeffs = np.where(degenerate, 0.0, coeffs)
    return EqualizerBank(
        mode=mode,
        coefficients=coeffs,
        channel_energy=energy,
        inv_gamma=inv_gamma,
        degenerate_cells=int(np.count_nonzero(degenerate)),
    )


def combine(received: np.ndarray, bank: EqualizerBank) -> tuple[np.ndarray, np.ndarray]:
    """Equalize and combine the slot pairs of all receive antennas.

    Parameters
    ----------
    received : ndarray, shape (nr, 2, ...)
        Slot-pair observations per receive antenna: index 0 holds the
        first slot, index 1 the second.
    bank : EqualizerBank
        Coefficients for a 2-transmit-antenna channel, shape (2, nr, ...).

    Returns
    -------
    (z1, z2) : pair of ndarrays shaped like one slot
        Combined estimates aligned with the encoder inputs s1 and s2.
    """
    received = np.asarray(received, dtype=complex)
    g = bank.coefficients
    if g.shape[0] != 2:
        raise ValueError("combining requires a 2-transmit-antenna bank")
    if received.ndim < 2 or received.shape[0] != g.shape[1] or received.shape[1] != 2:
        raise ValueError(
            f"received shape {received.shape} does not match bank {g.shape}"
        )
    y0 = received[:, 0]
    y1c = np.conj(received[:, 1])
    z1 = np.sum(g[0] * y0 + np.conj(g[1]) * y1c, axis=0)
    z2 = np.sum(g[1] * y0 - np.conj(g[0]) * y1c, axis=0)
    return z1, z2


def equalize_single(received: np.ndarray, bank: EqualizerBank) -> np.ndarray:
    """Single-transmit-antenna detection: z = sum_r g_r * y_r."""
    received = np.asarray(received, dtype=complex)
    g = bank.coefficients
    if g.shape[0] != 1:
        raise ValueError("single-antenna detection requires a 1-transmit bank")
    if received.shape[0] != g.shape[1]:
        raise ValueError(
            f"received shape {received.shape} does not match bank {g.shape}"
        )
    return np.sum(g[0] * received, axis=0)


def compute_rho(bank: EqualizerBank, cells) -> float:
    """Detector bias correction over the chip set of one spread symbol.

    `cells` indexes (or directly selects, when given as an array of
    energies gathered by the caller) the grid cells carrying the symbol's
    chips. Returns Lc / sum(A/(A + 1/gamma)); 1 exactly in the
    zero-forcing limit.
    """
    cells = np.asarray(cells)
    if cells.size == 0:
        raise ValueError("chip cell set must not be empty")
    if cells.dtype.kind in "iu":
        energy = bank.channel_energy.reshape(-1)[cells]
    else:
        energy = cells
    lam = np.zeros_like(energy, dtype=float)
    np.divide(
        energy, energy + bank.inv_gamma, out=lam, where=energy > DEGENERATE_ENERGY
    )
    return float(energy.size) / float(np.sum(lam))


def rho_from_energy(energy_blocks: np.ndarray, inv_gamma: float) -> np.ndarray:
    """Vectorized bias correction for (num_blocks, lc) gathered energies."""
    energy_blocks = np.asarray(energy_blocks)
    lam = np.zeros_like(energy_blocks, dtype=float)
    np.divide(
        energy_blocks,
        energy_blocks + inv_gamma,
        out=lam,
        where=energy_blocks > DEGENERATE_ENERGY,
    )
    return energy_blocks.shape[-1] / np.sum(lam, axis=-1)
