"""Component reconstruction: ridge and direct routes, method selection."""

import numpy as np
import pytest

from nmd.reconstruct import (DIRECT, RIDGE, estimate_component,
                             reconstruct_direct, reconstruct_ridge,
                             reconstruction_constants, select_method)
from nmd.ridge import extract_ridge
from nmd.tfr import (WFT, WT, Signal, compute_tfr, default_config,
                     extract_skeleton)


def analyze(sig, kind=WFT, f0=1.0):
    tfr = compute_tfr(sig, default_config(sig, kind, f0=f0))
    skel = extract_skeleton(tfr)
    curve = extract_ridge(skel)
    return tfr, skel, curve


def best_estimate(sig, kind=WFT, f0=1.0):
    """Both reconstruction routes plus the self-consistency selection."""
    from nmd.adapt import component_range, restricted_config
    tfr, skel, curve = analyze(sig, kind, f0)
    est_r = estimate_component(tfr, curve, skel, RIDGE)
    est_d = estimate_component(tfr, curve, skel, DIRECT)
    crange = component_range(skel, curve)
    sel_cfg = restricted_config(kind, f0, crange, sig.fs, padding="reflect")
    return select_method(est_d, est_r, sel_cfg)


class TestConstants:
    def test_window_integral_constant(self):
        """C_g equals the analytic half-integral of the Gaussian window."""
        for f0 in (0.5, 1.0, 2.0, 3.7):
            c = reconstruction_constants(WFT, f0)
            xi = np.linspace(-40 / f0, 40 / f0, 2_000_001)
            ghat = np.exp(-0.5 * (f0 * xi) ** 2)
            num = 0.5 * np.trapezoid(ghat, xi)
            assert c.C_g == pytest.approx(num, rel=1e-8)
            assert c.C_g == pytest.approx(np.sqrt(np.pi / 2) / f0, rel=1e-12)

    def test_wavelet_integral_constants(self):
        """C_psi and D_psi equal the log-frequency wavelet integrals."""
        for f0 in (0.7, 1.0, 2.0):
            c = reconstruction_constants(WT, f0)
            u = np.linspace(-30 / (2 * np.pi * f0), 30 / (2 * np.pi * f0),
                            2_000_001)
            psihat = np.exp(-0.5 * (2 * np.pi * f0 * u) ** 2)
            assert c.C_psi == pytest.approx(0.5 * np.trapezoid(psihat, u),
                                            rel=1e-8)
            assert c.D_psi == pytest.approx(
                0.5 * np.trapezoid(psihat * np.exp(u), u), rel=1e-8)


class TestPureTone:
    @pytest.mark.parametrize("kind", [WFT, WT])
    @pytest.mark.parametrize("method", [RIDGE, DIRECT])
    def test_amplitude_and_frequency(self, kind, method):
        fs, n, f, a = 50.0, 3000, 3.1416, 1.3
        t = np.arange(n) / fs
        sig = Signal(a * np.cos(2 * np.pi * f * t + 0.7), fs)
        tfr, skel, curve = analyze(sig, kind)
        if method == RIDGE:
            est = reconstruct_ridge(tfr, curve)
        else:
            est = reconstruct_direct(tfr, curve, skel)
        inner = slice(n // 10, -n // 10)
        assert np.max(np.abs(est.A[inner] - a)) / a < 1e-2
        assert np.max(np.abs(est.nu[inner] - 2 * np.pi * f)) \
            / (2 * np.pi * f) < 1e-2
        # the reconstructed series matches the input in the interior
        err = est.series()[inner] - sig.samples[inner]
        assert np.sqrt(np.mean(err ** 2)) < 2e-2 * a

    def test_phase_tracks_true_phase(self):
        fs, n, f = 40.0, 2000, 2.5
        t = np.arange(n) / fs
        sig = Signal(np.cos(2 * np.pi * f * t + 0.3), fs)
        tfr, skel, curve = analyze(sig)
        est = reconstruct_ridge(tfr, curve)
        inner = slice(n // 8, -n // 8)
        true_phi = 2 * np.pi * f * t + 0.3
        d = np.angle(np.exp(1j * (est.phi[inner] - true_phi[inner])))
        assert np.max(np.abs(d)) < 0.05


class TestAmplitudeModulation:
    def test_direct_route_recovers_envelope(self):
        fs, n = 50.0, 4000
        t = np.arange(n) / fs
        A = 1.0 + 0.4 * np.sin(2 * np.pi * 0.08 * t)
        sig = Signal(A * np.cos(2 * np.pi * 4.0 * t), fs)
        tfr, skel, curve = analyze(sig)
        est = reconstruct_direct(tfr, curve, skel)
        inner = slice(n // 10, -n // 10)
        assert np.max(np.abs(est.A[inner] - A[inner])) < 1e-2


class TestTwoTone:
    def test_dominant_tone_isolated(self):
        fs, n = 50.0, 2500
        t = np.arange(n) / fs
        x = 1.5 * np.cos(2 * np.pi * 3.0 * t) \
            + 0.5 * np.cos(2 * np.pi * 9.0 * t)
        sig = Signal(x, fs)
        tfr, skel, curve = analyze(sig)
        est = reconstruct_ridge(tfr, curve)
        inner = slice(n // 10, -n // 10)
        ref = 1.5 * np.cos(2 * np.pi * 3.0 * t)
        err = est.series()[inner] - ref[inner]
        assert np.sqrt(np.mean(err ** 2)) < 0.02


class TestSelectMethod:
    def test_returns_one_of_the_inputs_fields(self):
        fs, n = 50.0, 2000
        t = np.arange(n) / fs
        rng = np.random.default_rng(2)
        x = np.cos(2 * np.pi * 3.0 * t) + 0.3 * rng.standard_normal(n)
        sig = Signal(x, fs)
        est = best_estimate(sig)
        assert est.method_amp in (RIDGE, DIRECT)
        assert est.method_phase in (RIDGE, DIRECT)
        assert est.A.shape == (n,)
        assert np.all(est.A >= 0)
        assert np.all(np.isfinite(est.phi))

    def test_selection_prefers_direct_amplitude_under_strong_am(self):
        # at this modulation rate the peak-value route attenuates the
        # envelope noticeably while band integration recovers it, so the
        # self-consistency choice must go to the latter
        fs, n = 50.0, 4000
        t = np.arange(n) / fs
        A = 1.0 + 0.5 * np.sin(2 * np.pi * 0.08 * t)
        sig = Signal(A * np.cos(2 * np.pi * 4.0 * t), fs)
        est = best_estimate(sig)
        inner = slice(n // 10, -n // 10)
        assert est.method_amp == DIRECT
        assert np.max(np.abs(est.A[inner] - A[inner])) < 0.05


class TestEstimateSeries:
    def test_series_definition(self):
        from nmd.reconstruct import ComponentEstimate
        A = np.array([1.0, 2.0, 3.0])
        phi = np.array([0.0, np.pi / 2, np.pi])
        est = ComponentEstimate(A=A, phi=phi, nu=np.ones(3), fs=1.0)
        assert np.allclose(est.series(), A * np.cos(phi))
