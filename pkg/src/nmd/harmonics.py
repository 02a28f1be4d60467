"""Harmonic candidate extraction and surrogate significance testing.

A candidate for the h-th harmonic is read off the TFR skeleton: at each
time, the unimodal support containing h times the fundamental frequency
supplies its pre-reconstructed amplitude, phase and frequency.  The
candidate is accepted as a true harmonic only if its amplitude-phase
consistency with the fundamental beats that of time-shifted surrogates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .reconstruct import RIDGE, ComponentEstimate, _fill_invalid
from .tfr import Skeleton

#: consistency weights (amplitude, phase, frequency)
DEFAULT_WEIGHTS = (1.0, 1.0, 0.0)

#: minimum consistency for a harmonic to be considered recoverable,
#: 0.5**(w_A + w_phi) with the default weights
RHO_MIN = 0.25

#: consecutive rejections after which the harmonic scan stops
STOP_AFTER = 3


@dataclass(frozen=True)
class SurrogateConfig:
    """Time-shift surrogate test settings."""

    n_surrogates: int = 100
    significance_level: float = 0.95
    rho_min: float = RHO_MIN
    weights: tuple = DEFAULT_WEIGHTS


@dataclass
class ConsistencyReport:
    q_amp: float
    q_phase: float
    q_freq: float
    rho: float


@dataclass
class HarmonicVerdict:
    """Outcome of testing one harmonic-number candidate."""

    h: float
    rho: float
    significance: float
    accepted: bool
    report: ConsistencyReport
    a_h: float = 0.0            # amplitude ratio <A_h>/<A_1>
    phase_shift: float = 0.0    # circular mean of phi_h - h*phi_1
    f0_used: float = 0.0
    method: str = RIDGE
    estimate: ComponentEstimate | None = None


def consistency(A1, phi1, nu1, Ah, phih, nuh, h,
                weights=DEFAULT_WEIGHTS) -> ConsistencyReport:
    """Amplitude, phase and frequency consistency of a harmonic candidate.

    ``phi1`` must be unwrapped (it gets multiplied by h); the candidate
    phase may stay wrapped.  All series must already be restricted to a
    common time window.
    """
    mA1 = np.mean(A1)
    mAh = np.mean(Ah)
    den = np.mean(A1 * Ah)
    if den > 0:
        q_amp = float(np.exp(-np.sqrt(np.mean((Ah * mA1 - A1 * mAh) ** 2))
                             / den))
    else:
        q_amp = 0.0
    q_phase = float(np.abs(np.mean(np.exp(1j * (phih - h * phi1)))))
    mnu = np.mean(nuh)
    if mnu > 0:
        q_freq = float(np.exp(-np.sqrt(np.mean((nuh - h * nu1) ** 2)) / mnu))
    else:
        q_freq = 0.0
    wa, wp, wn = weights
    rho = q_amp ** wa * q_phase ** wp * (q_freq ** wn if wn else 1.0)
    return ConsistencyReport(q_amp=q_amp, q_phase=q_phase, q_freq=q_freq,
                             rho=float(rho))


def _locate_columns(skel: Skeleton, freq: np.ndarray,
                    cols: np.ndarray) -> np.ndarray:
    """Support index containing each frequency, at the given time columns."""
    tfr = skel.tfr
    if tfr.log_spaced:
        k = np.log(np.maximum(freq, 1e-300) / tfr.freqs[0]) / tfr.freq_step
    else:
        k = (freq - tfr.freqs[0]) / tfr.freq_step
    n_sup = skel.n_sup[cols]
    if skel.max_sup == 0:
        return np.full(cols.size, -1, dtype=np.int64)
    bounds = np.where(np.arange(skel.max_sup)[:, None] < n_sup[None, :] - 1,
                      skel.sup_hi[:, cols], np.inf)
    idx = np.sum(k[None, :] > bounds, axis=0)
    idx = np.minimum(idx, np.maximum(n_sup - 1, 0))
    idx[n_sup == 0] = -1
    return idx.astype(np.int64)


def _gather(skel: Skeleton, params, idx, cols):
    amps, phis, nus = params
    safe = np.maximum(idx, 0)
    A = amps[safe, cols]
    ph = phis[safe, cols]
    nu = nus[safe, cols]
    valid = (idx >= 0) & np.isfinite(A) & np.isfinite(nu) & (A > 0)
    return A, ph, nu, valid


def extract_harmonic_candidate(skel: Skeleton, fund: ComponentEstimate,
                               h: float,
                               method: str = RIDGE) -> ComponentEstimate:
    """Candidate estimate from the supports containing h * fundamental freq.

    Returns a full-length estimate with unwrapped phase; times where the
    lookup fails are interpolated and flagged invalid.
    """
    n = skel.n_times
    cols = np.arange(n)
    idx = _locate_columns(skel, h * fund.nu, cols)
    A, ph, nu, valid = _gather(skel, skel.params(method), idx, cols)
    A = np.where(valid, A, 0.0)
    nu = np.where(valid, nu, 0.0)
    phi = np.unwrap(np.where(valid, ph, 0.0))
    invalid = ~valid
    A, phi, nu = _fill_invalid(A, phi, nu, invalid, skel.tfr.fs)
    return ComponentEstimate(A=A, phi=phi, nu=nu, fs=skel.tfr.fs,
                             method_amp=method, method_phase=method,
                             invalid=invalid)


def surrogate_test(skel: Skeleton, fund: ComponentEstimate, h: float,
                   method: str = RIDGE,
                   config: SurrogateConfig | None = None):
    """Time-shift surrogate test of a harmonic candidate.

    The fundamental's parameters are shifted half the time delay backwards,
    the skeleton lookup half forwards; the consistency of each shifted pair
    is compared with the zero-shift value over a fixed central window.
    Returns (rho0, significance, report).
    """
    if config is None:
        config = SurrogateConfig()
    n = fund.n
    fs = fund.fs
    m = n // 4
    win = np.arange(m // 2, n - m // 2)
    params = skel.params(method)

    def rho_at(shift_samples: int) -> float:
        k1 = shift_samples // 2
        k2 = shift_samples - k1
        fi = np.clip(win - k1, 0, n - 1)
        ci = np.clip(win + k2, 0, n - 1)
        A1 = fund.A[fi]
        p1 = fund.phi[fi]
        n1 = fund.nu[fi]
        idx = _locate_columns(skel, h * n1, ci)
        Ah, ph, nuh, valid = _gather(skel, params, idx, ci)
        if valid.sum() < max(8, win.size // 4):
            return 0.0
        v = valid
        return consistency(A1[v], p1[v], n1[v], Ah[v], ph[v], nuh[v], h,
                           config.weights).rho

    # zero-shift reference, with the full report for diagnostics
    fi = win
    idx0 = _locate_columns(skel, h * fund.nu[fi], fi)
    A0, p0, n0, v0 = _gather(skel, params, idx0, fi)
    if v0.sum() < max(8, win.size // 4):
        report = ConsistencyReport(0.0, 0.0, 0.0, 0.0)
        return 0.0, 0.0, report
    report = consistency(fund.A[fi][v0], fund.phi[fi][v0], fund.nu[fi][v0],
                         A0[v0], p0[v0], n0[v0], h, config.weights)
    rho0 = report.rho

    nd = config.n_surrogates
    below = 0
    min_shift = m / (2 * fs) * (1 + 1 / nd)
    for d in range(1, nd + 1):
        dt = m * (1 - 2 * d / nd) / (2 * fs)
        if abs(dt) < 1.0 / fs:
            dt = np.copysign(min_shift, dt if dt != 0 else 1.0)
        shift = int(round(dt * fs))
        if rho_at(shift) < rho0:
            below += 1
    significance = below / nd
    return rho0, significance, report


def evaluate_harmonic(skel: Skeleton, fund: ComponentEstimate, h: float,
                      method: str = RIDGE,
                      config: SurrogateConfig | None = None,
                      run_surrogates: bool = True) -> HarmonicVerdict:
    """Extract a harmonic candidate from a skeleton and test it.

    With ``run_surrogates=False`` only the consistency is computed (used
    while optimizing the resolution parameter); significance is NaN and
    the verdict is never accepted.
    """
    if config is None:
        config = SurrogateConfig()
    if run_surrogates:
        rho0, sig, report = surrogate_test(skel, fund, h, method, config)
        accepted = (sig >= config.significance_level
                    and rho0 >= config.rho_min)
    else:
        n = fund.n
        m = n // 4
        win = np.arange(m // 2, n - m // 2)
        idx = _locate_columns(skel, h * fund.nu[win], win)
        Ah, ph, nuh, valid = _gather(skel, skel.params(method), idx, win)
        if valid.sum() < max(8, win.size // 4):
            report = ConsistencyReport(0.0, 0.0, 0.0, 0.0)
        else:
            v = valid
            report = consistency(fund.A[win][v], fund.phi[win][v],
                                 fund.nu[win][v], Ah[v], ph[v], nuh[v], h,
                                 config.weights)
        rho0 = report.rho
        sig = float("nan")
        accepted = False

    verdict = HarmonicVerdict(h=h, rho=rho0, significance=sig,
                              accepted=accepted, report=report,
                              f0_used=skel.tfr.config.f0, method=method)
    est = extract_harmonic_candidate(skel, fund, h, method)
    verdict.estimate = est
    ok = ~est.invalid if est.invalid is not None else np.ones(est.n, bool)
    if ok.any() and np.mean(fund.A[ok]) > 0:
        verdict.a_h = float(np.mean(est.A[ok]) / np.mean(fund.A[ok]))
        verdict.phase_shift = float(np.angle(np.mean(
            np.exp(1j * (est.phi[ok] - h * fund.phi[ok])))))
    return verdict


def harmonic_numbers(fund: ComponentEstimate, duration: float):
    """Admissible harmonic numbers above and below the fundamental.

    Returns (higher, lower): integers h = 2, 3, ... up to the Nyquist bound
    and fractions 1/2, 1/3, ... down to five cycles per record, below which
    the consistency statistics degrade too much to be trusted.
    """
    mean_hz = float(np.mean(fund.nu)) / (2 * np.pi)
    h_max = (fund.fs / 2) / mean_hz
    h_min = 5.0 * (1.0 / duration) / mean_hz
    higher = [float(h) for h in range(2, int(np.floor(h_max)) + 1)]
    lower = []
    k = 2
    while 1.0 / k > h_min:
        lower.append(1.0 / k)
        k += 1
    return higher, lower
