"""Component reconstruction from a ridge curve.

Two reconstruction routes are available: the ridge method (TFR value at the
peak, with quadratic discretization corrections) and the direct method
(integral of the TFR over the unimodal support band).  ``select_method``
chooses between them adaptively via self-consistency of re-extraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ridge import RidgeCurve
from .tfr import (WFT, WT, Signal, Skeleton, Tfr, TfrConfig, compute_tfr,
                  extract_skeleton, window_ft)

RIDGE = "ridge"
DIRECT = "direct"

#: inconsistency tuning coefficients (amplitude, phase, frequency)
KAPPA_DIRECT = (3.0, 4.0, 2.0)
KAPPA_RIDGE = (1.0, 1.0, 1.0)


@dataclass(frozen=True)
class ReconstructionConstants:
    """Normalization constants of the direct reconstruction integrals."""

    C_g: float = 0.0
    omega_bar_g: float = 0.0
    C_psi: float = 0.0
    D_psi: float = 0.0


def reconstruction_constants(kind: str, f0: float) -> ReconstructionConstants:
    if kind == WFT:
        # C_g = (1/2) int ghat = pi*g(0); Gaussian window
        return ReconstructionConstants(C_g=np.sqrt(np.pi / 2) / f0,
                                       omega_bar_g=0.0)
    a = (2 * np.pi * f0) ** 2
    c_psi = 0.5 * np.sqrt(2 * np.pi / a)
    d_psi = 0.5 * np.sqrt(2 * np.pi / a) * np.exp(0.5 / a)
    return ReconstructionConstants(C_psi=c_psi, D_psi=d_psi)


@dataclass
class ComponentEstimate:
    """Instantaneous amplitude, unwrapped phase and frequency series."""

    A: np.ndarray
    phi: np.ndarray
    nu: np.ndarray
    fs: float
    method_amp: str = RIDGE
    method_phase: str = RIDGE
    sup_lo: np.ndarray | None = None   # per-time band bounds (rad/s)
    sup_hi: np.ndarray | None = None
    omega_p: np.ndarray | None = None
    invalid: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.A.size

    def series(self) -> np.ndarray:
        """The reconstructed oscillation A(t)*cos(phi(t))."""
        return self.A * np.cos(self.phi)


def _fill_invalid(A, phi, nu, invalid, fs):
    """Interpolate flagged times: linear for A and nu, integrated for phi."""
    if invalid is None or not invalid.any():
        return A, phi, nu
    n = A.size
    if invalid.all():
        return A, phi, nu
    t = np.arange(n)
    good = ~invalid
    A = A.copy()
    nu = nu.copy()
    A[invalid] = np.interp(t[invalid], t[good], A[good])
    nu[invalid] = np.interp(t[invalid], t[good], nu[good])
    # rebuild phase over invalid stretches by integrating nu from the last
    # valid sample
    phi = phi.copy()
    idx = np.nonzero(invalid)[0]
    for i in idx:
        if i == 0:
            continue
        phi[i] = phi[i - 1] + 0.5 * (nu[i] + nu[i - 1]) / fs
    return A, phi, nu


def reconstruct_ridge(tfr: Tfr, curve: RidgeCurve) -> ComponentEstimate:
    """Ridge reconstruction: TFR at the peak with discretization correction."""
    n = curve.n_times
    cols = np.arange(n)
    amp = np.abs(tfr.values)
    nf = amp.shape[0]
    kp = np.clip(curve.peak_bin, 0, nf - 1)

    a2 = amp[kp, cols]
    interior = (kp > 0) & (kp < nf - 1)
    a1 = amp[np.clip(kp - 1, 0, nf - 1), cols]
    a3 = amp[np.clip(kp + 1, 0, nf - 1), cols]
    denom = 2 * a2 - a1 - a3
    ok = interior & (denom > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(ok, (a3 - a1) / (2 * denom), 0.0)

    step = tfr.freq_step
    wk = tfr.freqs[kp]
    f0 = tfr.config.f0
    if tfr.kind == WFT:
        nu = wk + p * step
        transfer = np.exp(-0.5 * (f0 * (wk - nu)) ** 2)
    else:
        nu = wk * np.exp(p * step)
        transfer = window_ft(WT, f0, nu / wk)
    vals = tfr.values[kp, cols]
    cc = 2.0 * vals / np.maximum(transfer, 1e-300)
    A = np.abs(cc)
    phi = np.unwrap(np.angle(cc))
    invalid = curve.filled | (A <= 0)
    A, phi, nu = _fill_invalid(A, phi, nu, invalid, tfr.fs)
    return ComponentEstimate(A=A, phi=phi, nu=nu, fs=tfr.fs,
                             method_amp=RIDGE, method_phase=RIDGE,
                             omega_p=curve.omega_p.copy(), invalid=invalid)


def reconstruct_direct(tfr: Tfr, curve: RidgeCurve,
                       skeleton: Skeleton) -> ComponentEstimate:
    """Direct reconstruction: band integrals over the curve's supports."""
    n = curve.n_times
    cols = np.arange(n)
    amp_d, phi_d, nu_d = skeleton.direct_params()
    safe = np.minimum(curve.sup_idx, np.maximum(skeleton.max_sup - 1, 0))
    A = amp_d[safe, cols].copy()
    phiw = phi_d[safe, cols]
    nu = nu_d[safe, cols].copy()
    invalid = curve.filled | ~np.isfinite(A) | (A <= 0) | ~(nu > 0)
    phiw = np.where(np.isfinite(phiw), phiw, 0.0)
    phi = np.unwrap(phiw)
    A[~np.isfinite(A)] = 0.0
    nu[~np.isfinite(nu)] = 0.0
    A, phi, nu = _fill_invalid(A, phi, nu, invalid, tfr.fs)
    lo, hi = skeleton.support_freqs()
    est = ComponentEstimate(A=A, phi=phi, nu=nu, fs=tfr.fs,
                            method_amp=DIRECT, method_phase=DIRECT,
                            omega_p=curve.omega_p.copy(), invalid=invalid)
    est.sup_lo = lo[safe, cols]
    est.sup_hi = hi[safe, cols]
    return est


def estimate_component(tfr: Tfr, curve: RidgeCurve, skeleton: Skeleton,
                       method: str) -> ComponentEstimate:
    if method == RIDGE:
        est = reconstruct_ridge(tfr, curve)
        lo, hi = skeleton.support_freqs()
        cols = np.arange(curve.n_times)
        safe = np.minimum(curve.sup_idx, np.maximum(skeleton.max_sup - 1, 0))
        est.sup_lo = lo[safe, cols]
        est.sup_hi = hi[safe, cols]
        return est
    return reconstruct_direct(tfr, curve, skeleton)


def _refine(est: ComponentEstimate, config: TfrConfig,
            method: str) -> ComponentEstimate:
    """Re-extract an estimate from the TFR of its own reconstruction.

    Takes the per-time amplitude maximum as the curve, then reconstructs
    with the given method.
    """
    sig = Signal(est.series(), est.fs)
    tfr = compute_tfr(sig, config)
    skel = extract_skeleton(tfr)
    n = sig.n
    # per-time strongest support
    peak_amp = np.where(np.isfinite(skel.peak_amp), skel.peak_amp, -np.inf)
    if skel.max_sup == 0:
        raise ValueError("re-extraction produced an empty skeleton")
    idx = np.argmax(peak_amp, axis=0)
    filled = skel.n_sup == 0
    cols = np.arange(n)
    safe = np.minimum(idx, np.maximum(skel.max_sup - 1, 0))
    curve = RidgeCurve(sup_idx=safe.astype(np.int64),
                       omega_p=np.where(filled, np.nan,
                                        skel.omega_p[safe, cols]),
                       peak_bin=skel.peak_bin[safe, cols],
                       functional_value=0.0, filled=filled)
    return estimate_component(tfr, curve, skel, method)


def _inconsistencies(orig: ComponentEstimate, ref: ComponentEstimate, kappa):
    ka, kp, kn = kappa
    eps_a = ka * np.sqrt(np.mean((ref.A - orig.A) ** 2))
    coher = np.abs(np.mean(np.exp(1j * (ref.phi - orig.phi))))
    eps_p = kp * np.sqrt(max(1.0 - coher ** 2, 0.0))
    eps_n = kn * np.sqrt(np.mean((ref.nu - orig.nu) ** 2))
    return eps_a, eps_p, eps_n


def select_method(est_d: ComponentEstimate, est_r: ComponentEstimate,
                  config: TfrConfig) -> ComponentEstimate:
    """Choose amplitude and phase/frequency routes by self-consistency.

    Each estimate's reconstruction is turned back into a signal, its TFR
    recomputed over the component's frequency range, re-extracted by
    per-time maximum and refined with the same method; the method with the
    smaller inconsistency wins (frequency follows the phase choice; exact
    ties go to the noise-robust ridge method).
    """
    ref_d = _refine(est_d, config, DIRECT)
    ref_r = _refine(est_r, config, RIDGE)
    eps_d = _inconsistencies(est_d, ref_d, KAPPA_DIRECT)
    eps_r = _inconsistencies(est_r, ref_r, KAPPA_RIDGE)

    amp_src = est_d if eps_d[0] < eps_r[0] else est_r
    ph_src = est_d if eps_d[1] < eps_r[1] else est_r
    return ComponentEstimate(
        A=amp_src.A.copy(), phi=ph_src.phi.copy(), nu=ph_src.nu.copy(),
        fs=est_r.fs, method_amp=amp_src.method_amp,
        method_phase=ph_src.method_phase,
        sup_lo=est_r.sup_lo, sup_hi=est_r.sup_hi,
        omega_p=est_r.omega_p, invalid=est_r.invalid)
