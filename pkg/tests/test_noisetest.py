"""Stopping test: phase-randomized surrogates and spectral entropy."""

import numpy as np
import pytest
import scipy.fft as sfft
from hypothesis import given, settings
from hypothesis import strategies as st

from nmd.adapt import FrequencyRange
from nmd.noisetest import ft_surrogate, spectral_entropy
from nmd.noisetest import test_against_noise as noise_verdict
from nmd.tfr import WFT, WT, Signal


class TestFtSurrogate:
    @given(seed=st.integers(0, 2 ** 31), n=st.integers(16, 400))
    @settings(max_examples=50, deadline=None)
    def test_power_spectrum_preserved(self, seed, n):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(n)
        s = ft_surrogate(x, rng)
        assert s.shape == x.shape
        assert s.dtype == np.float64
        a0 = np.abs(sfft.rfft(x))
        a1 = np.abs(sfft.rfft(s))
        assert np.max(np.abs(a1 - a0)) <= 1e-10 * max(np.max(a0), 1.0)

    def test_mean_preserved(self):
        # the zero-frequency coefficient keeps its phase, so the sample
        # mean survives randomization exactly
        rng = np.random.default_rng(0)
        x = 3.7 + rng.standard_normal(256)
        s = ft_surrogate(x, rng)
        assert np.mean(s) == pytest.approx(np.mean(x), abs=1e-12)

    def test_variance_preserved_but_series_scrambled(self):
        # Parseval: randomizing phases keeps the variance exactly, while
        # the waveform itself changes
        t = np.arange(4096) / 64.0
        x = (1 + 0.9 * np.sin(2 * np.pi * 0.05 * t)) \
            * np.cos(2 * np.pi * 4.03 * t)
        rng = np.random.default_rng(1)
        s = ft_surrogate(x, rng)
        assert np.std(s) == pytest.approx(np.std(x), rel=1e-10)
        assert np.max(np.abs(s - x)) > 0.1


class TestSpectralEntropy:
    def test_constant_series_is_perfectly_ordered(self):
        assert spectral_entropy(np.full(1000, 2.5)) == pytest.approx(0.0, abs=1e-12)

    def test_impulse_is_maximally_disordered(self):
        n = 512
        x = np.zeros(n)
        x[37] = 1.0
        assert spectral_entropy(x) == pytest.approx(np.log(n), abs=1e-12)

    def test_all_zero_series(self):
        assert spectral_entropy(np.zeros(64)) == 0.0

    @given(seed=st.integers(0, 2 ** 31), n=st.integers(8, 600))
    @settings(max_examples=60, deadline=None)
    def test_bounds(self, seed, n):
        rng = np.random.default_rng(seed)
        q = spectral_entropy(rng.standard_normal(n))
        assert 0.0 <= q <= np.log(n) + 1e-12

    def test_single_tone_beats_noise(self):
        t = np.arange(2000) / 100.0
        tone = 1.0 + 0.3 * np.sin(2 * np.pi * 0.25 * t)
        rng = np.random.default_rng(2)
        noisy = 1.0 + 0.3 * rng.standard_normal(2000)
        assert spectral_entropy(tone) < spectral_entropy(noisy)


class TestAgainstNoise:
    RANGE = FrequencyRange(2 * np.pi * 0.5, 2 * np.pi * 2.0)

    def test_white_noise_declared_noise(self):
        rng = np.random.default_rng(5)
        sig = Signal(rng.standard_normal(4000), 40.0)
        res = noise_verdict(sig, WFT, 1.0, self.RANGE,
                                 np.random.default_rng(0))
        assert res.is_noise
        assert res.significance < 0.95

    def test_modulated_component_detected(self):
        fs, n = 40.0, 4000
        t = np.arange(n) / fs
        nu = 2 * np.pi * (1.0 + 0.1 * np.sin(2 * np.pi * 0.09 * t))
        phi = np.concatenate(([0.0], np.cumsum((nu[1:] + nu[:-1]) / 2))) / fs
        rng = np.random.default_rng(6)
        x = (1 + 0.1 * np.sin(2 * np.pi * 0.04 * t)) * np.cos(phi) \
            + 0.7 * rng.standard_normal(n)
        res = noise_verdict(Signal(x, fs), WFT, 1.0, self.RANGE,
                                 np.random.default_rng(1))
        assert not res.is_noise
        assert res.significance >= 0.95

    def test_brownian_noise_declared_noise(self):
        rng = np.random.default_rng(7)
        b = np.cumsum(rng.standard_normal(4000))
        b = 4.0 * b / np.std(b)
        res = noise_verdict(Signal(b, 40.0), WT, 1.0, self.RANGE,
                                 np.random.default_rng(2))
        assert res.is_noise

    def test_result_reports_all_variants(self):
        rng = np.random.default_rng(8)
        sig = Signal(rng.standard_normal(2000), 40.0)
        res = noise_verdict(sig, WFT, 1.0, self.RANGE,
                                 np.random.default_rng(3), n_surrogates=10)
        assert set(res.d0) == {(1, 1), (0, 1), (1, 0)}
        assert set(res.exceed) == {(1, 1), (0, 1), (1, 0)}
        assert all(0 <= v <= 10 for v in res.exceed.values())
        assert res.n_surrogates == 10
