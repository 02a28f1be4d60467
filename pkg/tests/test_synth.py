"""Benchmark signal generation: recipes, noise processes, ground truth."""

import numpy as np
import pytest

from nmd.synth import (BROWNIAN, FILTERED_BROWNIAN, WHITE, ConfigError,
                       NoiseSpec, SynthSpec, brownian_noise,
                       filtered_brownian, generate, white_noise)


class TestValidation:
    def test_unknown_recipe(self):
        with pytest.raises(ConfigError):
            SynthSpec(recipe="nope")

    def test_unknown_noise_kind(self):
        with pytest.raises(ConfigError):
            NoiseSpec(kind="pink")

    def test_negative_sigma(self):
        with pytest.raises(ConfigError):
            NoiseSpec(kind=WHITE, sigma=-1.0)

    def test_fractional_sample_count(self):
        with pytest.raises(ConfigError):
            SynthSpec(fs=3.0, duration=1.1)

    def test_n_property(self):
        assert SynthSpec(fs=100.0, duration=100.0).n == 10000


class TestDeterminism:
    def test_same_seed_bit_identical(self):
        a, _ = generate(SynthSpec(recipe="example2", seed=7))
        b, _ = generate(SynthSpec(recipe="example2", seed=7))
        assert np.array_equal(a.samples, b.samples)

    def test_different_seed_differs(self):
        a, _ = generate(SynthSpec(recipe="example1", seed=1))
        b, _ = generate(SynthSpec(recipe="example1", seed=2))
        assert not np.array_equal(a.samples, b.samples)


class TestNoiseProcesses:
    def test_white_noise_scale(self):
        rng = np.random.default_rng(0)
        x = white_noise(100_000, 2.5, rng)
        assert np.std(x) == pytest.approx(2.5, rel=0.02)
        assert np.mean(x) == pytest.approx(0.0, abs=0.05)

    def test_brownian_deviation_exact(self):
        rng = np.random.default_rng(1)
        x = brownian_noise(10_000, 4.0, rng)
        assert np.std(x) == pytest.approx(4.0, rel=1e-12)

    def test_filtered_brownian_band_and_deviation(self):
        rng = np.random.default_rng(2)
        fs, n = 100.0, 10_000
        x = filtered_brownian(n, fs, (0.01, 0.2), 1.0, rng)
        # the deviation is normalized after filtering
        assert np.std(x) == pytest.approx(1.0, rel=1e-12)
        spec = np.abs(np.fft.rfft(x))
        f = np.fft.rfftfreq(n, 1 / fs)
        out_of_band = (f < 0.009) | (f > 0.21)
        assert np.max(spec[out_of_band]) < 1e-9 * np.max(spec)


class TestGroundTruth:
    def test_truth_total_equals_signal(self):
        sig, truth = generate(SynthSpec(recipe="example2", seed=3))
        assert np.array_equal(sig.samples, truth.total())

    def test_mode_phase_consistent_with_frequency(self):
        sig, truth = generate(SynthSpec(recipe="example2", seed=0))
        m = truth.modes[0]
        dphi = np.gradient(m.phi) * sig.fs
        inner = slice(10, -10)
        assert np.allclose(dphi[inner], m.nu[inner], rtol=1e-3)

    def test_example2_harmonic_tables(self):
        _, truth = generate(SynthSpec(recipe="example2", seed=0))
        assert len(truth.modes) == 2
        h1 = {h: (a, p) for h, a, p in truth.modes[0].harmonics}
        h2 = {h: (a, p) for h, a, p in truth.modes[1].harmonics}
        assert set(h1) == {1, 3, 5}
        assert set(h2) == {1, 2, 3}
        assert h1[3][0] == pytest.approx(0.75)
        assert h1[5][0] == pytest.approx(0.5)
        assert h1[3][1] == pytest.approx(-0.20 * np.pi)
        assert h1[5][1] == pytest.approx(0.25 * np.pi)
        assert h2[2][0] == pytest.approx(0.5)
        assert h2[3][0] == pytest.approx(0.25)
        assert h2[2][1] == pytest.approx(0.50 * np.pi)
        assert h2[3][1] == pytest.approx(-0.33 * np.pi)

    def test_example1_harmonic_set_and_default_noise(self):
        sig, truth = generate(SynthSpec(recipe="example1", seed=0))
        assert len(truth.modes) == 1
        hs = sorted(h for h, _, _ in truth.modes[0].harmonics)
        assert hs == [1, 3, 4, 7]
        # default corruption for this recipe is heavy Brownian noise
        assert np.std(truth.noise) == pytest.approx(4.0, rel=1e-9)

    def test_example2_default_noise_is_white(self):
        n = SynthSpec(recipe="example2").n
        _, truth = generate(SynthSpec(recipe="example2", seed=5))
        assert truth.noise.size == n
        assert np.std(truth.noise) == pytest.approx(1.725, rel=0.05)

    def test_noise_override(self):
        _, truth = generate(SynthSpec(recipe="example1", seed=0,
                                      noise=NoiseSpec(WHITE, 0.5)))
        assert np.std(truth.noise) == pytest.approx(0.5, rel=0.05)


class TestCustomRecipe:
    def test_pure_tone_without_modulation(self):
        spec = SynthSpec(recipe="custom", fs=50.0, duration=40.0,
                         freq_hz=3.0, amp=1.4)
        sig, truth = generate(spec)
        m = truth.modes[0]
        assert np.allclose(m.nu, 2 * np.pi * 3.0)
        assert np.allclose(m.A, 1.4)
        t = np.arange(spec.n) / spec.fs
        assert np.allclose(sig.samples, 1.4 * np.cos(2 * np.pi * 3.0 * t),
                           atol=1e-9)

    def test_modulation_knobs(self):
        spec = SynthSpec(recipe="custom", fs=50.0, duration=40.0,
                         freq_hz=2.0, am_depth=0.3, am_freq=0.1,
                         fm_depth=0.05, fm_freq=0.2)
        _, truth = generate(spec)
        m = truth.modes[0]
        assert np.max(m.A) == pytest.approx(1.3, abs=0.01)
        assert np.min(m.A) == pytest.approx(0.7, abs=0.01)
        assert np.max(m.nu) == pytest.approx(2 * np.pi * 2.1, abs=0.01)

    def test_custom_harmonics_enter_the_waveform(self):
        spec = SynthSpec(recipe="custom", fs=50.0, duration=20.0,
                         freq_hz=1.0, harmonics=((1, 1.0, 0.0),
                                                 (2, 0.5, 0.3)))
        sig, _ = generate(spec)
        t = np.arange(spec.n) / spec.fs
        ref = np.cos(2 * np.pi * t) + 0.5 * np.cos(4 * np.pi * t + 0.3)
        assert np.allclose(sig.samples, ref, atol=1e-9)
