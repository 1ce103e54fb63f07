"""OFDM modulation and demodulation with a cyclic-prefix guard interval.

The transform is unitary (Parseval holds between the used subcarriers and
the prefix-free body of the time-domain symbol), and the used subcarriers
sit centered in the band with the DC bin left empty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OfdmParams:
    """Multicarrier dimensioning of one OFDM symbol.

    Defaults correspond to the 57.6 MHz outdoor parameterization used by
    the simulator: 1024-point FFT, 736 used subcarriers and a 3.75 us
    guard interval (216 samples).
    """

    fft_size: int = 1024
    used_carriers: int = 736
    guard_samples: int = 216
    sampling_freq_hz: float = 57.6e6

    def __post_init__(self):
        if self.fft_size < 2 or (self.fft_size & (self.fft_size - 1)) != 0:
            raise ValueError(f"fft_size must be a power of two, got {self.fft_size}")
        if not 0 < self.used_carriers <= self.fft_size - 1:
            raise ValueError(
                f"used_carriers must be in [1, fft_size-1], got {self.used_carriers}"
            )
        if self.guard_samples < 0:
            raise ValueError("guard_samples must be non-negative")
        if self.sampling_freq_hz <= 0:
            raise ValueError("sampling_freq_hz must be positive")

    @property
    def subcarrier_spacing_hz(self) -> float:
        return self.sampling_freq_hz / self.fft_size

    @property
    def symbol_samples(self) -> int:
        """Samples per transmitted symbol, guard included."""
        return self.fft_size + self.guard_samples

    @property
    def symbol_duration_s(self) -> float:
        return self.symbol_samples / self.sampling_freq_hz

    @property
    def useful_duration_s(self) -> float:
        return self.fft_size / self.sampling_freq_hz


def allocate_subcarriers(params: OfdmParams) -> np.ndarray:
    """Return the signed bin indices of the used subcarriers.

    The band is centered around DC with the DC bin itself unused: for an
    even number of carriers the indices are {-n/2..-1, +1..+n/2}.
    """
    nc = params.used_carriers
    left = nc // 2
    right = nc - left
    return np.concatenate([np.arange(-left, 0), np.arange(1, right + 1)])


def subcarrier_frequencies(params: OfdmParams) -> np.ndarray:
    """Baseband frequencies (Hz) of the used subcarriers."""
    return allocate_subcarriers(params) * params.subcarrier_spacing_hz


def modulate(column: np.ndarray, params: OfdmParams) -> np.ndarray:
    """Transform one grid column (or a stack of columns) to time samples.

    Parameters
    ----------
    column : ndarray, shape (used_carriers,) or (used_carriers, n)
        Complex subcarrier amplitudes.

    Returns
    -------
    ndarray, shape (fft_size + guard_samples,) or (..., n)
        Unitary inverse transform with the last `guard_samples` of the
        body copied in front as a cyclic prefix.
    """
    column = np.asarray(column)
    if column.shape[0] != params.used_carriers:
        raise ValueError(
            f"expected {params.used_carriers} subcarriers, got {column.shape[0]}"
        )
    bins = allocate_subcarriers(params) % params.fft_size
    spectrum = np.zeros((params.fft_size,) + column.shape[1:], dtype=complex)
    spectrum[bins] = column
    body = np.fft.ifft(spectrum, axis=0, norm="ortho")
    if params.guard_samples == 0:
        return body
    return np.concatenate([body[-params.guard_samples:], body], axis=0)


def demodulate(samples: np.ndarray, params: OfdmParams) -> np.ndarray:
    """Strip the cyclic prefix and recover the used subcarrier amplitudes."""
    samples = np.asarray(samples)
    if samples.shape[0] != params.symbol_samples:
        raise ValueError(
            f"expected {params.symbol_samples} samples, got {samples.shape[0]}"
        )
    body = samples[params.guard_samples:]
    spectrum = np.fft.fft(body, axis=0, norm="ortho")
    bins = allocate_subcarriers(params) % params.fft_size
    return spectrum[bins]
