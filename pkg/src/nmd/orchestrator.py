"""Full decomposition loop and reference-signal filtering.

Each iteration detrends the working signal, extracts the dominant
component, stops if it fails the noise test, finds the true fundamental
and all of its harmonics, refines the mode by cross-harmonic averaging,
and subtracts it.  The loop ends when the residual is indistinguishable
from noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .adapt import (FrequencyRange, adapt_f0_for_harmonic, component_range,
                    convert_f0, harmonic_range, restricted_config,
                    select_tfr_kind)
from .harmonics import (STOP_AFTER, HarmonicVerdict, SurrogateConfig,
                        harmonic_numbers)
from .noisetest import NoiseTestResult, test_against_noise
from .reconstruct import (DIRECT, RIDGE, ComponentEstimate,
                          estimate_component, select_method)
from .ridge import extract_ridge
from .tfr import (WFT, WT, ConfigError, DegenerateInputError, Signal,
                  compute_tfr, default_config, extract_skeleton,
                  set_fft_workers)

AUTO = "auto"

MAX_ITERATIONS = 20
MAX_FUNDAMENTAL_SWITCHES = 3
DETREND_DEGREE = 3


@dataclass(frozen=True)
class DecomposeConfig:
    """Settings of the decomposition loop."""

    kind: str = AUTO            # auto | wft | wt
    f0: float = 1.0             # resolution of the preliminary transform
    seed: int = 0
    n_time_surrogates: int = 100
    n_noise_surrogates: int = 40
    max_iterations: int = MAX_ITERATIONS
    freq_min: float | None = None   # Hz, optional overall band limits
    freq_max: float | None = None
    bands: tuple = ()           # optional ((lo_hz, hi_hz), ...) per-band mode
    max_peaks: int = 40
    threads: int = 0            # FFT workers; 0 means all cores; results
                                # are identical for any value

    def __post_init__(self):
        if self.kind not in (AUTO, WFT, WT):
            raise ConfigError(f"unknown TFR kind {self.kind!r}")
        if not self.f0 > 0:
            raise ConfigError("f0 must be positive")
        if self.max_iterations < 1:
            raise ConfigError("need at least one iteration")


@dataclass
class NonlinearMode:
    """One extracted oscillation with a non-sinusoidal waveform."""

    fundamental: ComponentEstimate
    harmonics: list             # (h, ComponentEstimate, HarmonicVerdict)
    refined: dict               # h -> (A, phi, nu) after cross-averaging
    waveform: list              # (h, a_h, varphi_h), a_1 = 1, varphi_1 = 0
    series: np.ndarray

    @property
    def harmonic_set(self):
        return sorted(h for h, _, _ in self.harmonics)


@dataclass
class DecompositionResult:
    modes: list
    residual: Signal
    trend: np.ndarray
    trend_coefficients: list
    noise_tests: list
    provenance: dict = field(default_factory=dict)

    def reconstruction(self) -> np.ndarray:
        out = self.trend + self.residual.samples
        for m in self.modes:
            out = out + m.series
        return out


class DecompositionError(RuntimeError):
    """Loop failure; carries whatever was extracted before the failure."""

    def __init__(self, message, partial: DecompositionResult | None = None):
        super().__init__(message)
        self.partial = partial


def detrend(samples: np.ndarray, fs: float, degree: int = DETREND_DEGREE):
    """Remove a least-squares cubic; returns (detrended, coefficients).

    Coefficients are in the numpy polynomial (low-to-high) basis over time
    in seconds, so the trend can be re-evaluated exactly.
    """
    if samples.size < degree + 1:
        raise DegenerateInputError("too few samples to detrend")
    t = np.arange(samples.size) / fs
    coeffs = np.polynomial.polynomial.polyfit(t, samples, degree)
    trend = np.polynomial.polynomial.polyval(t, coeffs)
    return samples - trend, coeffs


def refine_mode(harmonics: list) -> dict:
    """Cross-harmonic averaging of amplitudes, phases and frequencies.

    ``harmonics`` is a list of (h, ComponentEstimate).  A common amplitude
    shape is shared between harmonics in proportion to their mean levels;
    each refined phase is the amplitude-weighted circular average of all
    harmonics' phases mapped to its own harmonic number, with integer
    cycle-offset correction suppressing noise-induced phase slips; the
    refined frequency is the same weighted average of mapped frequencies.
    """
    if not harmonics:
        raise ValueError("need at least one harmonic")
    mean_amp = {h: float(np.mean(est.A)) for h, est in harmonics}
    sum_amp = np.sum([est.A for _, est in harmonics], axis=0)
    total_mean = sum(mean_amp.values())

    refined = {}
    for h, est in harmonics:
        A_ref = mean_amp[h] * sum_amp / total_mean

        z = np.zeros(est.n, dtype=np.complex128)
        nu_ref = np.zeros(est.n)
        w_total = 0.0
        for h2, est2 in harmonics:
            w = min(1.0, h2 / h) * mean_amp[h2]
            # constant part of h*phi_h2 - h2*phi_h for this pair
            dphi = float(np.angle(np.mean(
                np.exp(1j * (h * est2.phi - h2 * est.phi)))))
            slips = np.round((h * est2.phi - h2 * est.phi - dphi)
                             / (2 * np.pi))
            theta = (h * est2.phi - dphi - 2 * np.pi * slips) / h2
            z += w * np.exp(1j * (theta - est.phi))
            nu_ref += w * (h / h2) * est2.nu
            w_total += w
        phi_ref = est.phi + np.angle(z)
        refined[h] = (A_ref, phi_ref, nu_ref / w_total)
    return refined


def _mode_from_refined(fund, harmonics, refined) -> NonlinearMode:
    series = np.zeros(fund.n)
    for h in refined:
        A, phi, _ = refined[h]
        series += A * np.cos(phi)
    A1 = float(np.mean(refined[1.0][0]))
    waveform = []
    for h in sorted(refined):
        if h == 1.0:
            waveform.append((1.0, 1.0, 0.0))
            continue
        a_h = float(np.mean(refined[h][0])) / A1
        varphi = float(np.angle(np.mean(
            np.exp(1j * (refined[h][1] - h * refined[1.0][1])))))
        waveform.append((h, a_h, varphi))
    return NonlinearMode(fundamental=fund, harmonics=harmonics,
                         refined=refined, waveform=waveform, series=series)


def _extract_fundamental(x: np.ndarray, fs: float, kind: str, f0: float,
                         freq_range: FrequencyRange | None,
                         config: DecomposeConfig):
    """Extract the dominant component and both reconstructions of it."""
    sig = Signal(x, fs)
    if freq_range is None:
        fmin = 2 * np.pi * config.freq_min if config.freq_min else None
        fmax = 2 * np.pi * config.freq_max if config.freq_max else None
        cfg = default_config(sig, kind, f0, freq_min=fmin, freq_max=fmax)
    else:
        cfg = restricted_config(kind, f0, freq_range, fs, padding="reflect")
    tfr = compute_tfr(sig, cfg)
    skel = extract_skeleton(tfr, max_peaks=config.max_peaks)
    curve = extract_ridge(skel)
    est_r = estimate_component(tfr, curve, skel, RIDGE)
    est_d = estimate_component(tfr, curve, skel, DIRECT)
    crange = component_range(skel, curve)
    sel_cfg = restricted_config(kind, f0, crange, fs, padding="reflect")
    est = select_method(est_d, est_r, sel_cfg)
    return est, crange


def _scan_direction(working, fund, numbers, kind, f0, crange, surr, config):
    """Test a sequence of harmonic numbers, subtracting accepted ones.

    Returns (accepted list of (h, estimate, verdict), remaining working
    signal).  Stops after STOP_AFTER consecutive rejections.
    """
    fs = fund.fs
    accepted = []
    consec = 0
    for h in numbers:
        verdict = adapt_f0_for_harmonic(
            Signal(working, fs), fund, h, kind, f0, crange, surr,
            max_peaks=config.max_peaks)
        if verdict.accepted:
            accepted.append((h, verdict.estimate, verdict))
            working = working - verdict.estimate.series()
            consec = 0
        else:
            consec += 1
            if consec >= STOP_AFTER:
                break
    return accepted, working


def _extract_mode(working, fs, kind, f0, crange, est, surr, config, rng):
    """Subharmonic check plus harmonic scan around a found fundamental."""
    duration = working.size / fs

    def scan_from(est, crange, f0):
        higher, _ = harmonic_numbers(est, duration)
        work2 = working - est.series()
        fund_verdict = HarmonicVerdict(h=1.0, rho=1.0, significance=1.0,
                                       accepted=True, report=None,
                                       a_h=1.0, phase_shift=0.0, f0_used=f0,
                                       method=est.method_amp)
        harmonics = [(1.0, est, fund_verdict)]
        accepted, _ = _scan_direction(work2, est, higher, kind, f0, crange,
                                      surr, config)
        harmonics.extend(accepted)
        return harmonics

    # make sure this is the fundamental and not a higher harmonic
    est0, crange0, f0_0 = est, crange, f0
    expect = 1.0        # harmonic number of the original component
    for _ in range(MAX_FUNDAMENTAL_SWITCHES):
        _, lower = harmonic_numbers(est, duration)
        sub_work = working - est.series()
        accepted_sub, _ = _scan_direction(sub_work, est, lower, kind, f0,
                                          crange, surr, config)
        if not accepted_sub:
            break
        h_sub = min(h for h, _, _ in accepted_sub)
        sub_verdict = next(v for h, _, v in accepted_sub if h == h_sub)
        sub_range = harmonic_range(crange, h_sub, kind, sub_verdict.f0_used,
                                   f0)
        est, crange = _extract_fundamental(working, fs, kind,
                                           sub_verdict.f0_used, sub_range,
                                           config)
        f0 = sub_verdict.f0_used
        expect /= h_sub

    harmonics = scan_from(est, crange, f0)

    # a switch asserted that the original component is the expect-th
    # harmonic of the new fundamental; if the scan does not confirm any
    # harmonic near that number, the subharmonic was spurious, so undo
    if expect != 1.0 and not any(abs(hh - expect) <= 0.5
                                 for hh, _, _ in harmonics if hh > 1):
        est, crange, f0 = est0, crange0, f0_0
        harmonics = scan_from(est, crange, f0)

    refined = refine_mode([(h, e) for h, e, _ in harmonics])
    return _mode_from_refined(est, harmonics, refined)


def decompose(signal: Signal, config: DecomposeConfig | None = None
              ) -> DecompositionResult:
    """Iteratively split a signal into modes, trend and noise residual."""
    if config is None:
        config = DecomposeConfig()
    set_fft_workers(config.threads if config.threads > 0 else None)
    fs = signal.fs
    surr = SurrogateConfig(n_surrogates=config.n_time_surrogates)
    ss = np.random.SeedSequence(config.seed)

    band_ranges = [None]
    if config.bands:
        band_ranges = [FrequencyRange(2 * np.pi * lo, 2 * np.pi * hi)
                       for lo, hi in config.bands]

    working = signal.samples.copy()
    trend_total = np.zeros(signal.n)
    trend_coeffs = []
    modes = []
    noise_tests = []

    iteration = 0
    try:
        for band in band_ranges:
            band_done = False
            while not band_done:
                if iteration >= config.max_iterations:
                    raise DecompositionError(
                        f"no convergence in {config.max_iterations} "
                        "iterations")
                iteration += 1
                rng = np.random.default_rng(ss.spawn(1)[0])

                detrended, coeffs = detrend(working, fs)
                trend_total += working - detrended
                trend_coeffs.append(coeffs)
                working = detrended

                # preliminary pass: logarithmic resolution unless forced
                pre_kind = WT if config.kind == AUTO else config.kind
                pre_f0 = 1.0 if config.kind == AUTO else config.f0
                est, crange = _extract_fundamental(
                    working, fs, pre_kind, pre_f0, band, config)

                test = test_against_noise(
                    Signal(working, fs), pre_kind, pre_f0, crange, rng,
                    n_surrogates=config.n_noise_surrogates,
                    max_peaks=config.max_peaks)
                noise_tests.append(test)
                if test.is_noise:
                    band_done = True
                    continue

                kind, f0 = pre_kind, pre_f0
                if config.kind == AUTO:
                    chosen = select_tfr_kind(est)
                    if chosen == WFT:
                        kind = WFT
                        f0 = convert_f0(pre_f0, float(np.mean(est.nu)))
                        est, crange = _extract_fundamental(
                            working, fs, kind, f0, crange, config)

                mode = _extract_mode(working, fs, kind, f0, crange, est,
                                     surr, config, rng)
                modes.append(mode)
                working = working - mode.series
    except DecompositionError:
        raise DecompositionError(
            "decomposition did not converge",
            partial=DecompositionResult(
                modes=modes, residual=Signal(working, fs),
                trend=trend_total, trend_coefficients=trend_coeffs,
                noise_tests=noise_tests,
                provenance={"seed": config.seed, "config": config}))

    return DecompositionResult(
        modes=modes, residual=Signal(working, fs), trend=trend_total,
        trend_coefficients=trend_coeffs, noise_tests=noise_tests,
        provenance={"seed": config.seed, "config": config})


def filter_by_reference(target: Signal, ref_phase: np.ndarray,
                        ref_freq: np.ndarray,
                        config: DecomposeConfig | None = None,
                        rho_min: float = 0.5) -> NonlinearMode | None:
    """Extract from ``target`` the mode phase-locked to a reference.

    The reference's phase and frequency act as a pseudo-fundamental; the
    h=1 candidate in the target is accepted on phase consistency alone
    (amplitudes of distinct signals need not be proportional).  Returns
    None if the target carries no oscillation related to the reference.
    """
    if config is None:
        config = DecomposeConfig()
    if ref_phase.size != target.n or ref_freq.size != target.n:
        raise ConfigError("reference series must match the target length")
    fs = target.fs
    ref = ComponentEstimate(A=np.ones(target.n), phi=ref_phase.copy(),
                            nu=ref_freq.copy(), fs=fs)
    lo = 0.75 * float(np.percentile(ref_freq, 5))
    hi = 1.25 * float(np.percentile(ref_freq, 95))
    crange = FrequencyRange(lo, hi)
    kind = WFT if config.kind == AUTO else config.kind
    f0 = convert_f0(1.0, float(np.mean(ref_freq))) if kind == WFT \
        else config.f0

    phase_surr = SurrogateConfig(n_surrogates=config.n_time_surrogates,
                                 rho_min=rho_min, weights=(0.0, 1.0, 0.0))
    verdict = adapt_f0_for_harmonic(target, ref, 1.0, kind, f0, crange,
                                    phase_surr, max_peaks=config.max_peaks)
    if not verdict.accepted or verdict.estimate is None:
        return None

    fund = verdict.estimate
    working = target.samples - fund.series()
    surr = SurrogateConfig(n_surrogates=config.n_time_surrogates)
    higher, _ = harmonic_numbers(fund, target.duration)
    accepted, _ = _scan_direction(working, fund, higher, kind, f0, crange,
                                  surr, config)
    harmonics = [(1.0, fund, verdict)] + accepted
    refined = refine_mode([(h, e) for h, e, _ in harmonics])
    return _mode_from_refined(fund, harmonics, refined)
