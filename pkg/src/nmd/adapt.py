"""Adaptive choices: frequency ranges, resolution parameter, TFR type.

Frequency ranges for harmonics are derived from the minimal effective
support of the fundamental in its TFR.  The resolution parameter for each
harmonic is tuned by maximizing the amplitude-phase consistency over a
theoretically motivated interval.  The transform type (linear vs
logarithmic frequency resolution) is chosen from whether the component's
modulation strengthens with frequency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import hilbert
from scipy.special import jv

from .harmonics import (RHO_MIN, ConsistencyReport, HarmonicVerdict,
                        SurrogateConfig, evaluate_harmonic)
from .reconstruct import DIRECT, RIDGE, ComponentEstimate
from .ridge import RidgeCurve
from .tfr import (BINS_PER_STD, WFT, WT, Signal, Skeleton, TfrConfig,
                  compute_tfr, extract_skeleton)

#: relative TFR amplitude below which frequency bins are outside the
#: effective support of a component
EPS_SUPPORT = 1e-3

#: grid points for the initial resolution-parameter sweep
N_GRID = 8

#: absolute precision of the resolution-parameter optimization
EPS_F0 = 0.02

#: relative consistency gain required to keep extending the search interval
EXTEND_GAIN = 0.01

#: multiplicative step of the endpoint extension; fine enough that the
#: region where the significance test retains power is not jumped over
EXTEND_FACTOR = 1.3

#: maximum resolutions given a full surrogate test per candidate; the
#: sweep stops early at the first acceptance
MAX_SIG_TRIES = 6

#: as above, for candidates below the fundamental; kept small because a
#: false acceptance there switches the fundamental itself
MAX_SIG_TRIES_SUB = 2

#: the analysis window's time extent may not exceed this fraction of the
#: record, so that the consistency statistics retain enough independent
#: samples for the time-shift surrogate test to be meaningful
MAX_WINDOW_FRACTION = 1.0 / 16.0

#: threshold of the transform-type criterion; slightly above 1 to offset
#: the log-resolution bias of the WT under broadband noise
KIND_THRESHOLD = 1.1


@dataclass(frozen=True)
class FrequencyRange:
    lo: float   # rad/s
    hi: float

    def __post_init__(self):
        if not 0 < self.lo < self.hi:
            raise ValueError("need 0 < lo < hi")

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def half(self) -> float:
        return 0.5 * (self.hi - self.lo)


def bessel_order_bound(a: float, eps: float = 1e-3) -> int:
    """Number of frequency-modulation sidebands with non-negligible weight.

    Smallest n such that the Bessel weights |J_k(a)| for |k| > n contribute
    at most ``eps`` of the total sum.
    """
    k_max = max(int(np.ceil(10 + 3 * abs(a))), 20)
    k = np.arange(-k_max, k_max + 1)
    w = np.abs(jv(k, a))
    total = w.sum()
    for n in range(k_max + 1):
        tail = total - w[np.abs(k) <= n].sum()
        if tail <= eps * total:
            return n
    return k_max


def component_range(skel: Skeleton, curve: RidgeCurve,
                    eps: float = EPS_SUPPORT) -> FrequencyRange:
    """Overall frequency range occupied by an extracted component.

    Per time, the minimal sub-band of the ridge's unimodal support whose
    excluded edges stay below ``eps`` times the peak amplitude; pooled over
    time as the 5th percentile of lower edges and 95th of upper edges,
    widened to cover the extreme peak frequencies.
    """
    tfr = skel.tfr
    amp = np.abs(tfr.values)
    nf, nt = amp.shape
    cols = np.arange(nt)
    safe = np.minimum(curve.sup_idx, np.maximum(skel.max_sup - 1, 0))
    kp = np.clip(skel.peak_bin[safe, cols], 0, nf - 1)
    lo = np.clip(skel.sup_lo[safe, cols], 0, nf - 1)
    hi = np.clip(skel.sup_hi[safe, cols], 0, nf - 1)
    thr = eps * amp[kp, cols]

    rows = np.arange(nf)[:, None]
    strong = amp >= thr[None, :]
    in_lo = strong & (rows >= lo[None, :]) & (rows <= kp[None, :])
    in_hi = strong & (rows >= kp[None, :]) & (rows <= hi[None, :])
    tilde_lo = np.min(np.where(in_lo, rows, nf - 1), axis=0)
    tilde_hi = np.max(np.where(in_hi, rows, 0), axis=0)

    use = ~curve.filled
    if not use.any():
        use = np.ones(nt, dtype=bool)
    w_lo = tfr.freqs[tilde_lo[use]]
    w_hi = tfr.freqs[tilde_hi[use]]
    wp = curve.omega_p[use]
    lo_f = min(float(np.percentile(w_lo, 5)), float(np.min(wp)))
    hi_f = max(float(np.percentile(w_hi, 95)), float(np.max(wp)))
    if not hi_f > lo_f:
        lo_f, hi_f = 0.9 * lo_f, 1.1 * max(hi_f, lo_f)
    return FrequencyRange(lo=lo_f, hi=hi_f)


def optimal_harmonic_f0(kind: str, f0_fund: float, h: float) -> float:
    """Resolution parameter at which the plain scaled range is exact."""
    if kind == WFT:
        return f0_fund * min(1.0, 1.0 / h)
    return f0_fund * min(1.0, h)


def harmonic_range(base: FrequencyRange, h: float, kind: str, f0: float,
                   f0_fund: float) -> FrequencyRange:
    """Frequency range expected to contain the h-th harmonic.

    The fundamental's range scaled by h and widened by max(1, h); if the
    resolution parameter is coarser than its optimum for this harmonic,
    the range is stretched about its center accordingly (linearly for the
    WFT, log-linearly for the WT).
    """
    mid = h * base.mid
    half = max(1.0, h) * base.half
    wmin = mid - half
    wmax = mid + half
    factor = max(1.0, optimal_harmonic_f0(kind, f0_fund, h) / f0)
    if kind == WFT:
        wmin = mid + (wmin - mid) * factor
        wmax = mid + (wmax - mid) * factor
    else:
        wmin = max(wmin, 1e-12 * mid)
        wmin = mid * (wmin / mid) ** factor
        wmax = mid * (wmax / mid) ** factor
    wmin = max(wmin, 1e-3 * mid)
    if not wmax > wmin:
        wmax = 2 * wmin
    return FrequencyRange(lo=wmin, hi=wmax)


def _grid_step(kind: str, f0: float) -> float:
    if kind == WFT:
        return 1.0 / (BINS_PER_STD * f0)
    return float(np.ceil(BINS_PER_STD * 2 * np.pi * f0 * np.log(2)))


def restricted_config(kind: str, f0: float, rng: FrequencyRange, fs: float,
                      padding: str = "zero") -> TfrConfig:
    wmax = min(rng.hi, 0.95 * np.pi * fs)
    wmin = min(rng.lo, 0.5 * wmax)
    return TfrConfig(kind=kind, f0=f0, freq_min=wmin, freq_max=wmax,
                     bin_step=_grid_step(kind, f0), padding=padding)


_GOLDEN = (np.sqrt(5) - 1) / 2


def adapt_f0_for_harmonic(signal: Signal, fund: ComponentEstimate, h: float,
                          kind: str, f0_fund: float, base: FrequencyRange,
                          surr: SurrogateConfig | None = None,
                          n_grid: int = N_GRID, eps_f0: float = EPS_F0,
                          max_extend: int = 8,
                          max_peaks: int | None = 40) -> HarmonicVerdict:
    """Tune the resolution parameter for one harmonic and test it.

    Sweeps a grid over the theoretical interval of useful resolutions,
    extends the interval while the consistency still grows at an endpoint,
    then runs the full surrogate test at the swept resolutions in
    descending consistency order until one accepts the candidate.  The
    accepted point is refined by golden-section search on the consistency,
    keeping the refinement only if it passes the test as well.
    """
    if surr is None:
        surr = SurrogateConfig()
    if kind == WFT:
        lo, hi = sorted((f0_fund / h, f0_fund))
    else:
        lo, hi = sorted((f0_fund, h * f0_fund))
    # keep the window's time extent a small fraction of the record: the
    # window time deviation is f0 seconds for the linear transform and
    # about 2*pi*f0/omega at frequency omega for the logarithmic one
    duration = signal.samples.size / signal.fs
    if kind == WFT:
        f0_cap = MAX_WINDOW_FRACTION * duration
    else:
        f0_cap = MAX_WINDOW_FRACTION * duration * h * base.mid / (2 * np.pi)
    hi = min(hi, max(f0_cap, lo * 1e-3))
    lo = min(lo, hi)
    if not hi > lo:
        hi = lo * 1.001

    cache: dict[float, tuple[float, str]] = {}

    # keep the candidate band on its own side of the fundamental's line
    nu_lo = float(np.percentile(fund.nu, 5))
    nu_hi = float(np.percentile(fund.nu, 95))

    def band(f0: float) -> FrequencyRange:
        rng = harmonic_range(base, h, kind, f0, f0_fund)
        b_lo, b_hi = rng.lo, rng.hi
        if h > 1:
            b_lo = max(b_lo, nu_lo)
        elif h < 1:
            b_hi = min(b_hi, nu_hi)
        if b_hi > b_lo:
            rng = FrequencyRange(b_lo, b_hi)
        return rng

    def build_skel(f0: float) -> Skeleton:
        cfg = restricted_config(kind, f0, band(f0), signal.fs)
        return extract_skeleton(compute_tfr(signal, cfg), max_peaks=max_peaks)

    def rho_of(f0: float) -> float:
        key = round(f0, 6)
        if key in cache:
            return cache[key][0]
        try:
            skel = build_skel(f0)
        except Exception:
            cache[key] = (0.0, RIDGE)
            return 0.0
        best_rho, best_m = 0.0, RIDGE
        for method in (RIDGE, DIRECT):
            v = evaluate_harmonic(skel, fund, h, method, surr,
                                  run_surrogates=False)
            if v.rho > best_rho:
                best_rho, best_m = v.rho, method
        cache[key] = (best_rho, best_m)
        return best_rho

    grid = list(np.linspace(lo, hi, n_grid))
    vals = [rho_of(f) for f in grid]

    # extend while the maximum sits at an interval end and clearly grows
    for _ in range(max_extend):
        i = int(np.argmax(vals))
        if i == len(grid) - 1:
            nxt = min(grid[-1] * EXTEND_FACTOR, max(f0_cap, hi))
            if nxt <= grid[-1] * 1.0001:
                break
            growing = rho_of(nxt) > vals[i] * (1 + EXTEND_GAIN)
            grid.append(nxt)
            vals.append(cache[round(nxt, 6)][0])
        elif i == 0:
            nxt = grid[0] / EXTEND_FACTOR
            growing = rho_of(nxt) > vals[i] * (1 + EXTEND_GAIN)
            grid.insert(0, nxt)
            vals.insert(0, cache[round(nxt, 6)][0])
        else:
            break
        if not growing:
            break

    order = np.argsort(grid)
    grid = [grid[i] for i in order]
    vals = [vals[i] for i in order]

    def test_at(f0c: float) -> HarmonicVerdict:
        skel = build_skel(f0c)
        return evaluate_harmonic(skel, fund, h, cache[round(f0c, 6)][1],
                                 surr, run_surrogates=True)

    # the harmonic counts as true if the surrogate test accepts it at any
    # of the swept resolutions; an over-smoothed window suppresses noise
    # (raising the consistency) but also blurs the very modulation the
    # shift test keys on, so the candidates are tried in descending
    # consistency order until one passes, skipping near-duplicates
    ranked = [k for k in sorted(cache, key=lambda k: cache[k][0],
                                reverse=True) if cache[k][0] >= RHO_MIN]
    # a falsely accepted subharmonic derails the whole mode (the presumed
    # fundamental would be switched), so those get fewer chances
    max_tries = MAX_SIG_TRIES if h > 1 else MAX_SIG_TRIES_SUB
    grid_verdict = None
    grid_f0 = None
    tried: list[float] = []
    for key in ranked:
        if len(tried) >= max_tries:
            break
        f0c = float(key)
        if any(abs(f0c - f) < 0.12 * f for f in tried):
            continue
        tried.append(f0c)
        verdict = test_at(f0c)
        if grid_verdict is None:
            grid_verdict = verdict
        if verdict.accepted:
            grid_verdict, grid_f0 = verdict, f0c
            break
    if grid_verdict is None:
        # no resolution reached the consistency floor; test once at the
        # best available point so the report still carries a significance
        best = max(cache, key=lambda k: cache[k][0])
        if cache[best][0] > 0:
            grid_verdict = test_at(float(best))
        else:
            report = ConsistencyReport(0.0, 0.0, 0.0, 0.0)
            grid_verdict = HarmonicVerdict(h=h, rho=0.0, significance=0.0,
                                           accepted=False, report=report,
                                           f0_used=f0_fund, method=RIDGE)
    if grid_f0 is None:
        return grid_verdict

    # golden-section refinement of the consistency maximum around the
    # accepted resolution; kept only if the refined point also passes
    i = int(np.argmin(np.abs(np.asarray(grid) - grid_f0)))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, len(grid) - 1)]
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = rho_of(x1), rho_of(x2)
    while b - a > eps_f0:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = rho_of(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = rho_of(x1)
    xbest = 0.5 * (a + b)
    if rho_of(xbest) > grid_verdict.rho and abs(xbest - grid_f0) > eps_f0:
        refined = test_at(xbest)
        if refined.accepted:
            return refined
    return grid_verdict


def _spread(x: np.ndarray) -> float:
    """Width of the central 75% of the values."""
    return float(np.percentile(x, 87.5) - np.percentile(x, 12.5))


def _variability_ratio(x: np.ndarray, y: np.ndarray) -> float:
    """Spread of |x/y| over spread of |x/<y>|, on analytic-signal magnitudes.

    Values below 1 mean the modulation carried by x weakens when scaled by
    the instantaneous value of y, i.e. it grows with frequency.
    """
    my = np.mean(y)
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = x / y
    r1 = np.where(np.isfinite(r1), r1, 0.0)
    num = _spread(np.abs(hilbert(r1)))
    den = _spread(np.abs(hilbert(x / my))) if my != 0 else 0.0
    if den == 0:
        return 0.0 if num == 0 else np.inf
    return num / den


def select_tfr_kind(est: ComponentEstimate) -> str:
    """Pick linear (WFT) or logarithmic (WT) frequency resolution.

    Based on whether the component's amplitude and frequency modulation
    strengthen with its instantaneous frequency.
    """
    dnu = np.gradient(est.nu) * est.fs
    dA = np.gradient(est.A) * est.fs
    v_nu = _variability_ratio(dnu, est.nu)
    v_a = _variability_ratio(dA, est.nu)
    total = 1.0 / (1.0 + v_nu) + 1.0 / (1.0 + v_a)
    return WFT if total < KIND_THRESHOLD else WT


def convert_f0(f0_wt: float, mean_nu: float) -> float:
    """Window resolution matching a wavelet resolution at a mean frequency."""
    return 2 * np.pi * f0_wt / mean_nu
