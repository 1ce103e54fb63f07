"""OFDM transform, guard interval, and subcarrier allocation tests."""

import numpy as np
import pytest

from mccdma import ofdm
from mccdma.ofdm import OfdmParams


def _random_column(params, rng):
    return rng.standard_normal(params.used_carriers) + 1j * rng.standard_normal(
        params.used_carriers
    )


class TestAllocation:
    def test_default_band_is_centered_with_dc_null(self):
        params = OfdmParams()
        bins = ofdm.allocate_subcarriers(params)
        assert bins.min() == -368 and bins.max() == 368
        assert 0 not in bins
        assert bins.size == 736

    def test_small_case(self):
        bins = ofdm.allocate_subcarriers(OfdmParams(8, 4, 0, 8.0))
        np.testing.assert_array_equal(bins, [-2, -1, 1, 2])

    def test_too_many_carriers(self):
        with pytest.raises(ValueError):
            OfdmParams(4, 8, 0, 4.0)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            OfdmParams(100, 64, 0, 64.0)  # not a power of two
        with pytest.raises(ValueError):
            OfdmParams(64, 32, -1, 64.0)
        with pytest.raises(ValueError):
            OfdmParams(64, 32, 0, 0.0)


class TestRoundTrip:
    @pytest.mark.parametrize(
        "params",
        [
            OfdmParams(8, 4, 2, 8.0),
            OfdmParams(64, 48, 16, 64.0),
            OfdmParams(1024, 736, 216, 57.6e6),
        ],
    )
    def test_identity_and_parseval(self, params):
        rng = np.random.default_rng(1)
        column = _random_column(params, rng)
        samples = ofdm.modulate(column, params)
        assert samples.shape == (params.symbol_samples,)
        np.testing.assert_allclose(ofdm.demodulate(samples, params), column, atol=1e-12)
        body_energy = np.sum(np.abs(samples[params.guard_samples:]) ** 2)
        assert abs(body_energy / np.sum(np.abs(column) ** 2) - 1.0) < 1e-12

    def test_single_bin_constant_modulus(self):
        params = OfdmParams(64, 48, 8, 64.0)
        column = np.zeros(48, dtype=complex)
        column[7] = 1.0
        samples = ofdm.modulate(column, params)
        np.testing.assert_allclose(
            np.abs(samples), np.full(params.symbol_samples, 1 / np.sqrt(64)), atol=1e-12
        )

    def test_zero_column(self):
        params = OfdmParams(16, 8, 4, 16.0)
        np.testing.assert_array_equal(
            ofdm.modulate(np.zeros(8, dtype=complex), params),
            np.zeros(params.symbol_samples),
        )

    def test_batched_columns(self):
        params = OfdmParams(32, 16, 8, 32.0)
        rng = np.random.default_rng(2)
        grid = rng.standard_normal((16, 5)) + 1j * rng.standard_normal((16, 5))
        samples = ofdm.modulate(grid, params)
        assert samples.shape == (params.symbol_samples, 5)
        np.testing.assert_allclose(ofdm.demodulate(samples, params), grid, atol=1e-12)

    def test_length_validation(self):
        params = OfdmParams(16, 8, 4, 16.0)
        with pytest.raises(ValueError):
            ofdm.modulate(np.zeros(9), params)
        with pytest.raises(ValueError):
            ofdm.demodulate(np.zeros(params.symbol_samples + 1), params)


class TestGuardInterval:
    def _through_channel(self, params, taps, rng):
        """Oracle: linear convolution in time vs per-bin tap DFT."""
        column = _random_column(params, rng)
        samples = ofdm.modulate(column, params)
        received = np.convolve(samples, taps)[: params.symbol_samples]
        recovered = ofdm.demodulate(received, params)
        bins = ofdm.allocate_subcarriers(params) % params.fft_size
        taps_fr = np.fft.fft(taps, n=params.fft_size)[bins]
        return recovered, taps_fr * column

    def test_multipath_within_guard_is_diagonal(self):
        params = OfdmParams(64, 48, 16, 64.0)
        rng = np.random.default_rng(7)
        taps = rng.standard_normal(12) + 1j * rng.standard_normal(12)
        recovered, expected = self._through_channel(params, taps, rng)
        np.testing.assert_allclose(recovered, expected, atol=1e-10)

    def test_multipath_beyond_guard_breaks_diagonality(self):
        # negative control: impulse response longer than the prefix
        params = OfdmParams(64, 48, 8, 64.0)
        rng = np.random.default_rng(8)
        taps = rng.standard_normal(24) + 1j * rng.standard_normal(24)
        recovered, expected = self._through_channel(params, taps, rng)
        assert np.abs(recovered - expected).max() > 1e-3
