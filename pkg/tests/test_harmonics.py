"""Harmonic candidate consistency and time-shift surrogate testing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nmd.harmonics import (RHO_MIN, SurrogateConfig, consistency,
                           evaluate_harmonic, harmonic_numbers)
from nmd.reconstruct import RIDGE, ComponentEstimate
from nmd.ridge import extract_ridge
from nmd.tfr import WFT, Signal, compute_tfr, default_config, extract_skeleton


def make_series(n=4000, fs=50.0, seed=0, noise=0.0):
    """Fundamental plus exact second harmonic with AM and FM."""
    rng = np.random.default_rng(seed)
    t = np.arange(n) / fs
    A = 1.0 + 0.25 * np.sin(2 * np.pi * 0.06 * t)
    nu = 2 * np.pi * (2.0 + 0.08 * np.sin(2 * np.pi * 0.11 * t))
    phi = np.concatenate(([0.0], np.cumsum((nu[1:] + nu[:-1]) / 2))) / fs
    x = A * (np.cos(phi) + 0.5 * np.cos(2 * phi + 0.7))
    x = x + noise * rng.standard_normal(n)
    return Signal(x, fs), A, phi, nu


def fundamental_estimate(sig):
    cfg = default_config(sig, WFT, f0=1.0)
    tfr = compute_tfr(sig, cfg)
    skel = extract_skeleton(tfr, max_peaks=40)
    curve = extract_ridge(skel)
    from nmd.reconstruct import reconstruct_ridge
    return skel, reconstruct_ridge(tfr, curve)


class TestConsistency:
    def test_exact_harmonic_is_fully_consistent(self):
        n = 3000
        t = np.arange(n) / 50.0
        A1 = 1.0 + 0.2 * np.sin(0.4 * t)
        phi1 = 2 * np.pi * 1.3 * t
        nu1 = np.full(n, 2 * np.pi * 1.3)
        rep = consistency(A1, phi1, nu1, 0.37 * A1, 3 * phi1 + 1.1,
                          3 * nu1, 3)
        assert rep.q_amp == pytest.approx(1.0, abs=1e-12)
        assert rep.q_phase == pytest.approx(1.0, abs=1e-12)
        assert rep.q_freq == pytest.approx(1.0, abs=1e-12)
        assert rep.rho == pytest.approx(1.0, abs=1e-12)

    @given(scale1=st.floats(0.1, 30.0), scaleh=st.floats(0.1, 30.0),
           seed=st.integers(0, 2 ** 31))
    @settings(max_examples=40, deadline=None)
    def test_amplitude_scale_invariance(self, scale1, scaleh, seed):
        rng = np.random.default_rng(seed)
        n = 400
        A1 = 1.0 + 0.5 * rng.random(n)
        Ah = 1.0 + 0.5 * rng.random(n)
        phi1 = np.cumsum(0.1 + rng.random(n))
        phih = 2 * phi1 + rng.standard_normal(n)
        nu1 = 1.0 + rng.random(n)
        nuh = 2 * nu1 + 0.1 * rng.standard_normal(n)
        a = consistency(A1, phi1, nu1, Ah, phih, nuh, 2)
        b = consistency(scale1 * A1, phi1, nu1, scaleh * Ah, phih, nuh, 2)
        assert a.q_amp == pytest.approx(b.q_amp, rel=1e-9)
        assert a.q_phase == pytest.approx(b.q_phase, rel=1e-9)

    @given(seed=st.integers(0, 2 ** 31))
    @settings(max_examples=40, deadline=None)
    def test_bounds(self, seed):
        rng = np.random.default_rng(seed)
        n = 300
        rep = consistency(rng.random(n) + 0.1, np.cumsum(rng.random(n)),
                          rng.random(n) + 0.1, rng.random(n) + 0.1,
                          np.cumsum(rng.random(n)), rng.random(n) + 0.1, 2)
        for q in (rep.q_amp, rep.q_phase, rep.q_freq, rep.rho):
            assert 0.0 <= q <= 1.0

    def test_random_phase_has_low_consistency(self):
        rng = np.random.default_rng(3)
        n = 3000
        t = np.arange(n) / 50.0
        A1 = np.ones(n)
        phi1 = 2 * np.pi * 1.3 * t
        nu1 = np.full(n, 2 * np.pi * 1.3)
        phih = np.cumsum(rng.random(n))
        rep = consistency(A1, phi1, nu1, np.ones(n), phih, nu1 * 2, 2)
        assert rep.q_phase < 0.2


class TestHarmonicNumbers:
    def test_ranges(self):
        est = ComponentEstimate(A=np.ones(100),
                                phi=np.arange(100.0),
                                nu=np.full(100, 2 * np.pi), fs=100.0)
        higher, lower = harmonic_numbers(est, 100.0)
        assert higher[0] == 2.0
        assert higher[-1] == 50.0
        # candidates below the fundamental need >= 5 cycles per record
        assert lower[0] == 0.5
        assert min(lower) > 5.0 / 100.0
        assert all(x > 5.0 / 100.0 for x in lower)

    def test_short_record_kills_subharmonics(self):
        est = ComponentEstimate(A=np.ones(100),
                                phi=np.arange(100.0),
                                nu=np.full(100, 2 * np.pi), fs=10.0)
        _, lower = harmonic_numbers(est, 10.0)
        assert lower == []


class TestSurrogateTest:
    def test_true_harmonic_accepted(self):
        sig, _, _, _ = make_series(noise=0.1)
        skel, fund = fundamental_estimate(sig)
        cfg = SurrogateConfig(n_surrogates=100)
        v = evaluate_harmonic(skel, fund, 2.0, RIDGE, cfg)
        assert v.accepted
        assert v.rho > 0.5
        assert v.significance >= 0.95
        assert v.a_h == pytest.approx(0.5, abs=0.1)
        assert v.phase_shift == pytest.approx(0.7, abs=0.2)

    def test_absent_harmonic_rejected(self):
        sig, _, _, _ = make_series(noise=0.3)
        skel, fund = fundamental_estimate(sig)
        cfg = SurrogateConfig(n_surrogates=100)
        v = evaluate_harmonic(skel, fund, 7.0, RIDGE, cfg)
        assert not v.accepted

    def test_consistency_only_mode_never_accepts(self):
        sig, _, _, _ = make_series(noise=0.1)
        skel, fund = fundamental_estimate(sig)
        v = evaluate_harmonic(skel, fund, 2.0, RIDGE, run_surrogates=False)
        assert not v.accepted
        assert np.isnan(v.significance)
        assert v.rho > 0.5

    def test_rho_floor_blocks_weak_candidates(self):
        assert RHO_MIN == pytest.approx(0.5 ** 2)
