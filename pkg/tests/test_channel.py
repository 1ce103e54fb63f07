"""Channel profile parsing, realization statistics, and response tests."""

import numpy as np
import pytest

from mccdma import channel
from mccdma.channel import ChannelProfile, SpatialConfig, make_profile
from mccdma.simulator import packaged_profile_path


@pytest.fixture(scope="module")
def bran_e():
    return channel.load_profile(packaged_profile_path("bran_e"))


class TestProfile:
    def test_single_tap(self, tmp_path):
        path = tmp_path / "single.profile"
        path.write_text("0 0.0\n")
        profile = channel.load_profile(path)
        assert profile.num_taps == 1
        assert profile.rms_delay_spread_s() == 0.0

    def test_two_equal_taps_rms(self, tmp_path):
        path = tmp_path / "two.profile"
        path.write_text("# comment\n0 0.0\n1000 0.0\n")
        profile = channel.load_profile(path)
        assert abs(profile.rms_delay_spread_s() - 0.5e-6) < 1e-12

    def test_shipped_outdoor_profile(self, bran_e):
        assert bran_e.num_taps == 17
        assert 0.2e-6 <= bran_e.rms_delay_spread_s() <= 0.3e-6
        assert abs(sum(bran_e.powers) - 1.0) < 1e-9

    def test_parse_errors(self, tmp_path):
        bad = tmp_path / "bad.profile"
        bad.write_text("0 0.0 extra\n")
        with pytest.raises(ValueError):
            channel.load_profile(bad)
        empty = tmp_path / "empty.profile"
        empty.write_text("# nothing\n")
        with pytest.raises(ValueError):
            channel.load_profile(empty)
        decreasing = tmp_path / "dec.profile"
        decreasing.write_text("100 0.0\n0 0.0\n")
        with pytest.raises(ValueError):
            channel.load_profile(decreasing)

    def test_invalid_construction(self):
        with pytest.raises(ValueError):
            ChannelProfile(delays_s=(0.0,), powers=(0.5,))  # not normalized
        with pytest.raises(ValueError):
            make_profile([0.0, 1e-6], [1.0, -1.0])


class TestRealization:
    def test_same_seed_bit_identical(self, bran_e):
        spatial = SpatialConfig(nt=2, nr=2)
        a = channel.realize(bran_e, spatial, seed=123)
        b = channel.realize(bran_e, spatial, seed=123)
        np.testing.assert_array_equal(a.aod_rad, b.aod_rad)
        np.testing.assert_array_equal(a.phases, b.phases)
        np.testing.assert_array_equal(a.doppler_hz, b.doppler_hz)

    def test_single_ray_colocated_elements_identical(self):
        profile = make_profile([0.0], [1.0], num_subrays=1)
        spatial = SpatialConfig(nt=2, nr=2, bs_spacing_lambda=0.0, ms_spacing_lambda=0.0)
        real = channel.realize(profile, spatial, seed=5)
        h = channel.frequency_response(real, np.array([0.0]), np.array([0.0, 1e6]))
        for t in range(2):
            for r in range(2):
                np.testing.assert_allclose(h[0, t, r], h[0, 0, 0], atol=1e-14)
        assert abs(abs(h[0, 0, 0, 0]) - 1.0) < 1e-12

    def test_per_tap_ensemble_power(self, bran_e):
        rng = np.random.default_rng(0)
        spatial = SpatialConfig()
        acc = np.zeros(bran_e.num_taps)
        n = 10_000
        for _ in range(n):
            real = channel.realize(bran_e, spatial, rng)
            coeff = (real.amplitudes[:, None] * np.exp(1j * real.phases)).sum(axis=1)
            acc += np.abs(coeff) ** 2
        measured = acc / n
        np.testing.assert_allclose(measured, bran_e.powers, rtol=0.03)

    def test_doppler_frequency_value(self):
        spatial = SpatialConfig()
        assert abs(spatial.max_doppler_hz - 277.8) < 0.1


class TestFrequencyResponse:
    def test_flat_for_single_ray_single_tap(self):
        profile = make_profile([0.0], [1.0], num_subrays=1)
        real = channel.realize(profile, SpatialConfig(velocity_mps=0.0), seed=1)
        freqs = np.linspace(-20e6, 20e6, 64)
        h = channel.frequency_response(real, np.array([0.0, 1e-3]), freqs)
        np.testing.assert_allclose(np.abs(h), 1.0, atol=1e-12)
        np.testing.assert_allclose(h[0], h[1], atol=1e-12)

    def test_two_path_periodicity_and_nulls(self):
        profile = make_profile([0.0, 1e-6], [0.5, 0.5], num_subrays=1)
        real = channel.realize(profile, SpatialConfig(velocity_mps=0.0), seed=2)
        freqs = np.linspace(0, 1e6, 257)[:-1]
        h0 = channel.frequency_response(real, np.array([0.0]), freqs)[0, 0, 0]
        h1 = channel.frequency_response(real, np.array([0.0]), freqs + 1e6)[0, 0, 0]
        np.testing.assert_allclose(h0, h1, atol=1e-10)  # period 1 MHz
        mags = np.abs(h0)
        assert mags.min() < 2e-2 and mags.max() > 0.99

    def test_delay_shift_multiplies_linear_phase(self, bran_e):
        shift = 0.4e-6
        shifted = make_profile(
            np.asarray(bran_e.delays_s) + shift, bran_e.powers, num_subrays=20
        )
        spatial = SpatialConfig(nt=2, nr=1)
        a = channel.realize(bran_e, spatial, seed=7)
        b = channel.realize(shifted, spatial, seed=7)
        freqs = np.array([-1e6, 0.33e6, 4e6])
        ha = channel.frequency_response(a, np.array([1e-4]), freqs)
        hb = channel.frequency_response(b, np.array([1e-4]), freqs)
        np.testing.assert_allclose(
            hb, ha * np.exp(-2j * np.pi * freqs * shift), atol=1e-12
        )

    def test_coherence_bandwidth(self, bran_e):
        bc = channel.estimate_coherence_bandwidth(bran_e, num_realizations=32, seed=3)
        assert 1.0e6 <= bc <= 2.0e6

    def test_doppler_autocorrelation_first_zero(self):
        # ensemble autocorrelation should track the isotropic-scattering law
        profile = make_profile([0.0], [1.0])  # 20 sub-rays
        spatial = SpatialConfig()
        fd = spatial.max_doppler_hz
        taus = np.linspace(0.0, 1.0 / fd, 121)
        rng = np.random.default_rng(4)
        acc = np.zeros(taus.size, dtype=complex)
        for _ in range(256):
            real = channel.realize(profile, spatial, rng)
            h = channel.frequency_response(real, taus, np.array([0.0]))[:, 0, 0, 0]
            acc += h * np.conj(h[0])
        corr = acc.real / acc.real[0]
        crossing = np.nonzero(corr < 0)[0][0]
        tau_zero = taus[crossing]
        assert 0.75 * 0.4 / fd <= tau_zero <= 1.25 * 0.4 / fd


class TestApplyChannel:
    def test_flat_identity(self):
        rng = np.random.default_rng(5)
        grids = rng.standard_normal((1, 4, 8)) + 1j * rng.standard_normal((1, 4, 8))
        trace = np.ones((4, 1, 1, 8), dtype=complex)
        np.testing.assert_allclose(channel.apply_channel(grids, trace), grids)

    def test_inactive_antenna(self):
        rng = np.random.default_rng(6)
        grids = rng.standard_normal((2, 3, 5)) + 1j * rng.standard_normal((2, 3, 5))
        trace = np.zeros((3, 2, 1, 5), dtype=complex)
        trace[:, 0, 0, :] = 1.0
        np.testing.assert_allclose(channel.apply_channel(grids, trace)[0], grids[0])

    def test_matches_triple_loop(self):
        rng = np.random.default_rng(7)
        nt, nr, s, k = 2, 2, 4, 6
        grids = rng.standard_normal((nt, s, k)) + 1j * rng.standard_normal((nt, s, k))
        trace = rng.standard_normal((s, nt, nr, k)) + 1j * rng.standard_normal((s, nt, nr, k))
        expected = np.zeros((nr, s, k), dtype=complex)
        for r in range(nr):
            for u in range(s):
                for c in range(k):
                    for t in range(nt):
                        expected[r, u, c] += trace[u, t, r, c] * grids[t, u, c]
        np.testing.assert_allclose(channel.apply_channel(grids, trace), expected, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            channel.apply_channel(np.zeros((1, 2, 3)), np.zeros((2, 1, 1, 4)))


class TestAwgn:
    def test_zero_variance_identity(self):
        grid = np.ones((2, 3, 4), dtype=complex)
        np.testing.assert_array_equal(channel.add_awgn(grid, 0.0, seed=0), grid)

    def test_sample_variance(self):
        grid = np.zeros(1_000_000, dtype=complex)
        noisy = channel.add_awgn(grid, 1.0, seed=1)
        assert abs(np.mean(np.abs(noisy) ** 2) - 1.0) < 0.01

    def test_same_seed_same_noise(self):
        grid = np.zeros(100, dtype=complex)
        np.testing.assert_array_equal(
            channel.add_awgn(grid, 0.5, seed=9), channel.add_awgn(grid, 0.5, seed=9)
        )

    def test_negative_variance_rejected(self):
        with pytest.raises(ValueError):
            channel.add_awgn(np.zeros(4, dtype=complex), -0.1, seed=0)


class TestSpatialCorrelation:
    def test_zero_spacing_is_unity(self, bran_e):
        corr = channel.estimate_spatial_correlation(bran_e, 0.0, "bs", 32, seed=0)
        assert abs(corr - 1.0) < 1e-9

    def test_half_wavelength_targets(self, bran_e):
        bs = channel.estimate_spatial_correlation(bran_e, 0.5, "bs", 32, seed=1)
        ms = channel.estimate_spatial_correlation(bran_e, 0.5, "ms", 32, seed=1)
        assert 0.55 <= bs <= 0.85
        assert 0.20 <= ms <= 0.50

    def test_wide_spacing_decorrelates(self, bran_e):
        for side in ("bs", "ms"):
            corr = channel.estimate_spatial_correlation(bran_e, 10.0, side, 32, seed=2)
            assert corr < 0.15

    def test_monotone_decorrelation(self, bran_e):
        spacings = (0.0, 0.5, 2.0, 10.0)
        values = [
            channel.estimate_spatial_correlation(bran_e, d, "bs", 32, seed=3)
            for d in spacings
        ]
        for a, b in zip(values, values[1:]):
            assert b <= a + 0.05

    def test_validation(self, bran_e):
        with pytest.raises(ValueError):
            channel.estimate_spatial_correlation(bran_e, 0.5, "bs", 8)
        with pytest.raises(ValueError):
            channel.estimate_spatial_correlation(bran_e, 0.5, "rooftop", 32)
