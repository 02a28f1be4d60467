"""Windowed Fourier and wavelet transforms on a discrete frequency grid.

Provides the two time-frequency representations (TFRs) used throughout the
decomposition: the WFT with a Gaussian window and the WT with a lognormal
wavelet, plus the per-time "skeleton" (amplitude peaks and the unimodal
frequency bands around them, with pre-reconstructed component parameters).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

WFT = "wft"
WT = "wt"

#: worker count for the batched FFTs; rows are independent transforms, so
#: results are identical for any worker count
_FFT_WORKERS = -1


def set_fft_workers(n: int | None):
    """Set the FFT worker count (None or -1 means all cores)."""
    global _FFT_WORKERS
    _FFT_WORKERS = -1 if n is None else int(n)

#: frequency bins per window/wavelet frequency standard deviation
BINS_PER_STD = 10

#: minimum number of fundamental cycles for usable statistics
MIN_CYCLES = 5


class ConfigError(ValueError):
    """Invalid TFR / decomposition configuration."""


class DegenerateInputError(ValueError):
    """Input too short or otherwise unusable."""


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled real time series."""

    samples: np.ndarray
    fs: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size < 2:
            raise DegenerateInputError("signal must be 1-D with at least 2 samples")
        if not np.all(np.isfinite(samples)):
            raise DegenerateInputError("signal contains non-finite samples")
        if not self.fs > 0:
            raise ConfigError("sampling frequency must be positive")

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.n / self.fs

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n) / self.fs


@dataclass(frozen=True)
class TfrConfig:
    """Transform kind, resolution and frequency-grid parameters.

    Frequencies are angular (rad/s).  ``bin_step`` is the linear grid step
    for the WFT and the number of voices per octave for the WT.
    """

    kind: str
    f0: float = 1.0
    freq_min: float = 0.0
    freq_max: float = 0.0
    bin_step: float = 0.0
    padding: str = "reflect"

    def __post_init__(self):
        if self.kind not in (WFT, WT):
            raise ConfigError(f"unknown TFR kind {self.kind!r}")
        if not self.f0 > 0:
            raise ConfigError("f0 must be positive")
        if self.padding not in ("reflect", "zero"):
            raise ConfigError(f"unknown padding {self.padding!r}")
        if self.freq_min and self.freq_max and not (0 < self.freq_min < self.freq_max):
            raise ConfigError("need 0 < freq_min < freq_max")


def default_config(signal: Signal, kind: str, f0: float = 1.0,
                   freq_min: float | None = None, freq_max: float | None = None,
                   padding: str = "reflect") -> TfrConfig:
    """Fill in the default frequency grid for a signal.

    The default range spans from ``MIN_CYCLES`` cycles per record up to 95%
    of Nyquist; grid density is ``BINS_PER_STD`` bins per window/wavelet
    frequency standard deviation.
    """
    if freq_min is None:
        freq_min = 2 * np.pi * MIN_CYCLES / signal.duration
    if freq_max is None:
        freq_max = np.pi * signal.fs * 0.95
    if not 0 < freq_min < freq_max:
        raise ConfigError("empty default frequency range")
    if kind == WFT:
        step = 1.0 / (BINS_PER_STD * f0)
    else:
        step = float(np.ceil(BINS_PER_STD * 2 * np.pi * f0 * np.log(2)))
    return TfrConfig(kind=kind, f0=f0, freq_min=freq_min, freq_max=freq_max,
                     bin_step=step, padding=padding)


def window_ft(kind: str, f0: float, xi) -> np.ndarray | float:
    """Frequency-domain window (WFT) or wavelet (WT) transfer function.

    Gaussian window ``exp(-(f0*xi)^2/2)`` peaking at xi=0, or lognormal
    wavelet ``exp(-(2*pi*f0*log(xi))^2/2)`` peaking at xi=1 (zero for
    xi <= 0).  Total function, vectorized over ``xi``.
    """
    xi = np.asarray(xi, dtype=np.float64)
    if kind == WFT:
        out = np.exp(-0.5 * (f0 * xi) ** 2)
    else:
        out = np.zeros_like(xi)
        pos = xi > 0
        with np.errstate(divide="ignore"):
            out[pos] = np.exp(-0.5 * (2 * np.pi * f0 * np.log(xi[pos])) ** 2)
    return out if out.ndim else float(out)


def _freq_grid(config: TfrConfig) -> np.ndarray:
    if config.kind == WFT:
        step = config.bin_step
        n_bins = int(np.floor((config.freq_max - config.freq_min) / step)) + 1
        if n_bins < 2:
            raise ConfigError("frequency grid has fewer than 2 bins")
        return config.freq_min + step * np.arange(n_bins)
    dlog = np.log(2) / config.bin_step
    n_bins = int(np.floor(np.log(config.freq_max / config.freq_min) / dlog)) + 1
    if n_bins < 2:
        raise ConfigError("frequency grid has fewer than 2 bins")
    return config.freq_min * np.exp(dlog * np.arange(n_bins))


@dataclass
class Tfr:
    """Complex TFR matrix indexed [frequency bin, time index]."""

    values: np.ndarray
    freqs: np.ndarray
    times: np.ndarray
    config: TfrConfig
    fs: float

    @property
    def kind(self) -> str:
        return self.config.kind

    @property
    def log_spaced(self) -> bool:
        return self.config.kind == WT

    @property
    def freq_step(self) -> float:
        """Grid step: linear (rad/s) for WFT, in log-frequency for WT."""
        if self.kind == WFT:
            return self.config.bin_step
        return np.log(2) / self.config.bin_step


def compute_tfr(signal: Signal, config: TfrConfig) -> Tfr:
    """Compute the WFT or WT of a signal on the config's frequency grid.

    Each frequency row is the inverse FFT of the positive-frequency signal
    spectrum multiplied by the window/wavelet transfer function centered
    (WFT) or scaled (WT) at that row's frequency.
    """
    n = signal.n
    freqs = _freq_grid(config)
    if config.freq_max > np.pi * signal.fs and config.kind == WFT:
        raise ConfigError("freq_max exceeds Nyquist")

    pad = n // 2
    if config.padding == "reflect":
        padded = np.pad(signal.samples, pad, mode="reflect")
    else:
        padded = np.pad(signal.samples, pad, mode="constant")
    n_fft = sfft.next_fast_len(padded.size)

    spec = sfft.fft(padded, n_fft)
    # keep only the strictly positive frequency half (analytic part)
    xi = 2 * np.pi * sfft.fftfreq(n_fft, d=1.0 / signal.fs)
    spec[xi <= 0] = 0.0
    if n_fft % 2 == 0:
        spec[n_fft // 2] = 0.0

    pos = xi > 0
    xi_pos = xi[pos]
    spec_pos = spec[pos]

    values = np.empty((freqs.size, n), dtype=np.complex128)
    lo = pad
    hi = pad + n
    # positive-frequency bins form one contiguous index block
    first_pos = int(np.argmax(pos))

    # the Gaussian transfer is negligible beyond this many deviations from
    # the row frequency; only that band of the spectrum is filled in
    n_dev = 8.0
    if config.kind == WFT:
        half_width = n_dev / config.f0
        band_lo = np.searchsorted(xi_pos, freqs - half_width)
        band_hi = np.searchsorted(xi_pos, freqs + half_width)
    else:
        rel = np.exp(n_dev / (2 * np.pi * config.f0))
        band_lo = np.searchsorted(xi_pos, freqs / rel)
        band_hi = np.searchsorted(xi_pos, freqs * rel)

    # batched inverse FFT over row chunks, bounded scratch memory
    chunk = max(1, int(2 ** 25 // max(n_fft, 1)))
    for c0 in range(0, freqs.size, chunk):
        n_rows = min(chunk, freqs.size - c0)
        rows = np.zeros((n_rows, n_fft), dtype=np.complex128)
        for j in range(n_rows):
            b0, b1 = band_lo[c0 + j], band_hi[c0 + j]
            xs = xi_pos[b0:b1]
            if config.kind == WFT:
                transfer = np.exp(
                    -0.5 * (config.f0 * (freqs[c0 + j] - xs)) ** 2)
            else:
                transfer = np.exp(-0.5 * (2 * np.pi * config.f0
                                          * np.log(xs / freqs[c0 + j])) ** 2)
            rows[j, first_pos + b0:first_pos + b1] = spec_pos[b0:b1] * transfer
        values[c0:c0 + chunk] = sfft.ifft(rows, axis=1,
                                          workers=_FFT_WORKERS)[:, lo:hi]

    return Tfr(values=values, freqs=freqs, times=signal.times, config=config,
               fs=signal.fs)


def tfr_quadrature_column(signal: Signal, config: TfrConfig, t: float,
                          freqs: np.ndarray) -> np.ndarray:
    """Direct numerical quadrature of the time-domain transform definition.

    Slow oracle used by tests: evaluates the transform of the analytic part
    of the (padded) signal at one time instant for the given frequencies.
    """
    n = signal.n
    pad = n // 2
    if config.padding == "reflect":
        padded = np.pad(signal.samples, pad, mode="reflect")
    else:
        padded = np.pad(signal.samples, pad, mode="constant")
    n_fft = sfft.next_fast_len(padded.size)
    spec = sfft.fft(padded, n_fft)
    xi = 2 * np.pi * sfft.fftfreq(n_fft, d=1.0 / signal.fs)
    spec[xi <= 0] = 0.0
    if n_fft % 2 == 0:
        spec[n_fft // 2] = 0.0
    analytic = sfft.ifft(spec)

    u = (np.arange(n_fft) - pad) / signal.fs
    du = 1.0 / signal.fs
    out = np.empty(freqs.size, dtype=np.complex128)
    f0 = config.f0
    for i, w in enumerate(freqs):
        if config.kind == WFT:
            g = np.exp(-0.5 * ((u - t) / f0) ** 2) / (np.sqrt(2 * np.pi) * f0)
            kern = g * np.exp(-1j * w * (u - t))
        else:
            # psi*(x) = (1/2pi) int psihat(xi) e^{-i xi x} dxi, with the
            # xi-integral evaluated by quadrature over log-frequency
            arg = w * (u - t)
            xx = np.linspace(-8 / (2 * np.pi * f0), 8 / (2 * np.pi * f0), 4001)
            dxx = xx[1] - xx[0]
            xi_q = np.exp(xx)
            psihat = np.exp(-0.5 * (2 * np.pi * f0 * xx) ** 2)
            kern = (psihat * xi_q * dxx) @ np.exp(-1j * np.outer(xi_q, arg)) / (2 * np.pi)
            kern = kern * w
        out[i] = np.sum(analytic * kern) * du
    return out


# ---------------------------------------------------------------------------
# Skeleton
# ---------------------------------------------------------------------------

@dataclass
class Skeleton:
    """Per-time partition of a TFR into unimodal supports.

    Ragged structure stored as padded ``(P, N)`` arrays; entry ``[m, t]`` is
    valid for ``m < n_sup[t]``.  Per-support ridge-reconstructed parameters
    are precomputed; direct-method parameters are computed lazily.
    """

    tfr: Tfr
    n_sup: np.ndarray          # (N,) number of supports per time
    sup_lo: np.ndarray         # (P, N) lowest bin of support (inclusive)
    sup_hi: np.ndarray         # (P, N) highest bin of support (inclusive)
    peak_bin: np.ndarray       # (P, N) bin of the amplitude peak
    peak_amp: np.ndarray       # (P, N) interpolated peak amplitude
    omega_p: np.ndarray        # (P, N) interpolated peak frequency (rad/s)
    amp_r: np.ndarray          # (P, N) ridge amplitude
    phi_r: np.ndarray          # (P, N) ridge phase (wrapped)
    nu_r: np.ndarray           # (P, N) ridge frequency (rad/s)
    _direct: tuple | None = field(default=None, repr=False)

    @property
    def n_times(self) -> int:
        return self.n_sup.size

    @property
    def max_sup(self) -> int:
        return self.sup_lo.shape[0]

    def ridge_params(self):
        return self.amp_r, self.phi_r, self.nu_r

    def direct_params(self):
        """Direct-method (A, phi, nu) per support; computed on first use."""
        if self._direct is None:
            self._direct = _direct_support_params(self)
        return self._direct

    def params(self, method: str):
        if method == "ridge":
            return self.ridge_params()
        if method == "direct":
            return self.direct_params()
        raise ValueError(f"unknown reconstruction method {method!r}")

    def support_freqs(self):
        """Support bounds in rad/s as (P, N) arrays (NaN where unused)."""
        freqs = self.tfr.freqs
        lo = np.where(self.sup_lo >= 0, freqs[np.clip(self.sup_lo, 0, None)], np.nan)
        hi = np.where(self.sup_hi >= 0, freqs[np.clip(self.sup_hi, 0, None)], np.nan)
        return lo, hi

    def locate(self, freq: np.ndarray) -> np.ndarray:
        """Index of the support whose band contains each frequency.

        ``freq`` is rad/s per time; frequencies in a boundary gap resolve to
        the nearest support (linear distance for WFT, log for WT).  Returns
        -1 where a time has no supports at all.
        """
        tfr = self.tfr
        if tfr.log_spaced:
            k = (np.log(np.maximum(freq, 1e-300) / tfr.freqs[0])) / tfr.freq_step
        else:
            k = (freq - tfr.freqs[0]) / tfr.freq_step
        # boundary between support m and m+1 sits at the valley bin sup_hi[m]
        bounds = np.where(np.arange(self.max_sup)[:, None] < self.n_sup[None, :] - 1,
                          self.sup_hi, np.inf)
        idx = np.sum(k[None, :] > bounds, axis=0)
        idx = np.minimum(idx, np.maximum(self.n_sup - 1, 0))
        idx[self.n_sup == 0] = -1
        return idx.astype(np.int64)


def _ridge_support_params(tfr: Tfr, peak_bin, valid):
    """Quadratic peak interpolation + ridge reconstruction, vectorized."""
    amp = np.abs(tfr.values)
    nf = amp.shape[0]
    tt = np.broadcast_to(np.arange(amp.shape[1]), peak_bin.shape)
    kp = np.clip(peak_bin, 0, nf - 1)
    a2 = amp[kp, tt]
    interior = valid & (peak_bin > 0) & (peak_bin < nf - 1)
    a1 = amp[np.clip(kp - 1, 0, nf - 1), tt]
    a3 = amp[np.clip(kp + 1, 0, nf - 1), tt]
    denom = 2 * a2 - a1 - a3
    ok = interior & (denom > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(ok, (a3 - a1) / (2 * denom), 0.0)
    # vertex amplitude of the fitted parabola
    peak_amp = np.where(ok, a2 + 0.25 * (a3 - a1) * p, a2)

    step = tfr.freq_step
    wk = tfr.freqs[kp]
    if tfr.kind == WFT:
        delta = p * step
        nu = wk + delta
        omega_p = nu
        transfer = np.exp(-0.5 * (tfr.config.f0 * delta) ** 2)
    else:
        dlog = p * step
        nu = wk * np.exp(dlog)
        omega_p = nu
        with np.errstate(divide="ignore"):
            transfer = np.exp(-0.5 * (2 * np.pi * tfr.config.f0 * dlog) ** 2)
    vals = tfr.values[kp, tt]
    with np.errstate(divide="ignore", invalid="ignore"):
        cc = 2.0 * vals / np.maximum(transfer, 1e-300)
    amp_r = np.abs(cc)
    phi_r = np.angle(cc)
    return peak_amp, omega_p, amp_r, phi_r, nu


def _direct_support_params(skel: Skeleton):
    """Direct reconstruction (band integrals) for every support."""
    tfr = skel.tfr
    vals = tfr.values
    freqs = tfr.freqs
    from .reconstruct import reconstruction_constants
    consts = reconstruction_constants(tfr.kind, tfr.config.f0)

    if tfr.kind == WFT:
        integrand = vals
        w_mom = freqs[:, None] * vals
        dx = tfr.freq_step
    else:
        integrand = vals          # times dlog(omega), constant step
        w_mom = freqs[:, None] * vals
        dx = tfr.freq_step

    # cumulative trapezoid along the frequency axis, prepended with 0
    def ctrapz(m):
        mid = 0.5 * (m[1:] + m[:-1]) * dx
        out = np.empty_like(m)
        out[0] = 0.0
        np.cumsum(mid, axis=0, out=out[1:])
        return out

    c0 = ctrapz(integrand)
    c1 = ctrapz(w_mom)

    tt = np.broadcast_to(np.arange(vals.shape[1]), skel.sup_lo.shape)
    lo = np.clip(skel.sup_lo, 0, None)
    hi = np.clip(skel.sup_hi, 0, None)
    i0 = c0[hi, tt] - c0[lo, tt]
    i1 = c1[hi, tt] - c1[lo, tt]

    if tfr.kind == WFT:
        cc = i0 / consts.C_g
        with np.errstate(divide="ignore", invalid="ignore"):
            nu = np.real(i1 / np.where(i0 == 0, np.inf, i0)) - consts.omega_bar_g
    else:
        cc = i0 / consts.C_psi
        with np.errstate(divide="ignore", invalid="ignore"):
            nu = np.real((i1 / consts.D_psi) / np.where(cc == 0, np.inf, cc))
    amp_d = np.abs(cc)
    phi_d = np.angle(cc)
    # degenerate integrals: fall back to ridge values
    bad = ~np.isfinite(nu) | (nu <= 0) | (amp_d <= 0)
    amp_d = np.where(bad, skel.amp_r, amp_d)
    phi_d = np.where(bad, skel.phi_r, phi_d)
    nu = np.where(bad, skel.nu_r, nu)
    return amp_d, phi_d, nu


def _ragged_bins(mask: np.ndarray, counts: np.ndarray, p_max: int,
                 fill: int) -> np.ndarray:
    """Stack the True row indices of each column into a padded array."""
    nt = mask.shape[1]
    out = np.full((p_max, nt), fill, dtype=np.int64)
    cols, rows = np.nonzero(mask.T)
    if cols.size:
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        pos = np.arange(cols.size) - np.repeat(starts, counts)
        out[pos, cols] = rows
    return out


def extract_skeleton(tfr: Tfr, max_peaks: int | None = None) -> Skeleton:
    """Partition each TFR column into unimodal supports around its peaks.

    ``max_peaks`` optionally keeps only the strongest peaks per time
    (merging the discarded ones into their neighbours' bands), bounding the
    cost of downstream curve extraction on noisy wide-band TFRs.
    """
    amp = np.abs(tfr.values)
    nf, nt = amp.shape

    great_prev = np.empty((nf, nt), dtype=bool)
    great_prev[0] = True
    np.greater_equal(amp[1:], amp[:-1], out=great_prev[1:])
    great_next = np.empty((nf, nt), dtype=bool)
    great_next[-1] = True
    np.greater(amp[:-1], amp[1:], out=great_next[:-1])
    is_peak = great_prev & great_next & (amp > 0)

    # valley: strict descent then (non-strict) ascent; complements is_peak
    is_valley = np.zeros((nf, nt), dtype=bool)
    is_valley[1:-1] = (amp[1:-1] < amp[:-2]) & (amp[1:-1] <= amp[2:])

    n_peaks = is_peak.sum(axis=0)
    p_max = int(n_peaks.max(initial=0))
    if p_max == 0:
        z = np.zeros((0, nt), dtype=np.int64)
        zf = np.zeros((0, nt))
        return Skeleton(tfr=tfr, n_sup=n_peaks.astype(np.int64), sup_lo=z,
                        sup_hi=z, peak_bin=z, peak_amp=zf, omega_p=zf,
                        amp_r=zf, phi_r=zf, nu_r=zf)

    peak_bin = _ragged_bins(is_peak, n_peaks, p_max, -1)

    n_val = is_valley.sum(axis=0)
    v_max = max(int(n_val.max(initial=0)), 1)
    valley_bin = _ragged_bins(is_valley, n_val, v_max, nf - 1)

    # well-formed columns have exactly one valley between consecutive peaks;
    # plateaus can break this, fix those columns individually
    bad = np.nonzero((n_peaks > 0) & (n_val != n_peaks - 1))[0]
    if bad.size:
        peak_bin, valley_bin, n_peaks = _fix_columns(
            amp, peak_bin, valley_bin, n_peaks, bad)
        p_max = peak_bin.shape[0]
        v_max = valley_bin.shape[0]

    valid = peak_bin >= 0
    sup_lo = np.zeros((p_max, nt), dtype=np.int64)
    sup_hi = np.full((p_max, nt), nf - 1, dtype=np.int64)
    if p_max > 1:
        m = np.arange(p_max)[:, None]
        cols = np.arange(nt)[None, :]
        prev_valley = valley_bin[np.clip(m - 1, 0, v_max - 1), cols]
        sup_lo = np.where(m > 0, prev_valley, 0)
        next_valley = valley_bin[np.clip(m, 0, v_max - 1), cols]
        sup_hi = np.where(m < n_peaks[None, :] - 1, next_valley, nf - 1)
    sup_lo = np.where(valid, sup_lo, 0)
    sup_hi = np.where(valid, sup_hi, 0)

    skel = _build_skeleton(tfr, n_peaks, sup_lo, sup_hi, peak_bin, valid)
    if max_peaks is not None and skel.max_sup > max_peaks:
        skel = _prune_skeleton(skel, max_peaks)
    return skel


def _build_skeleton(tfr, n_peaks, sup_lo, sup_hi, peak_bin, valid):
    peak_amp, omega_p, amp_r, phi_r, nu_r = _ridge_support_params(
        tfr, peak_bin, valid)
    inval = ~valid
    for arr in (peak_amp, omega_p, amp_r, phi_r, nu_r):
        arr[inval] = np.nan
    return Skeleton(tfr=tfr, n_sup=n_peaks.astype(np.int64), sup_lo=sup_lo,
                    sup_hi=sup_hi, peak_bin=np.where(valid, peak_bin, 0),
                    peak_amp=peak_amp, omega_p=omega_p,
                    amp_r=amp_r, phi_r=phi_r, nu_r=nu_r)


def _fix_columns(amp, peak_bin, valley_bin, n_peaks, bad_cols):
    """Per-column repair for plateau-broken peak/valley alternation."""
    nf = amp.shape[0]
    peak_bin = peak_bin.copy()
    valley_bin = valley_bin.copy()
    n_peaks = n_peaks.copy()
    new_peaks, new_valleys = [], []
    for t in bad_cols:
        col = amp[:, t]
        peaks, valleys = [], []
        k = 0
        while k < nf:
            # find end of any plateau
            j = k
            while j + 1 < nf and col[j + 1] == col[j]:
                j += 1
            left = col[k - 1] if k > 0 else -np.inf
            right = col[j + 1] if j + 1 < nf else -np.inf
            if col[k] > 0 and col[k] >= left and col[k] > right:
                peaks.append(j)
            elif peaks and col[k] < left and col[k] <= right:
                # keep only the deepest valley between peaks
                if len(valleys) < len(peaks):
                    valleys.append(k)
                elif col[k] < col[valleys[-1]]:
                    valleys[-1] = k
            j += 1
            k = j
        # drop trailing valleys beyond the last peak
        valleys = valleys[:max(len(peaks) - 1, 0)]
        new_peaks.append(peaks)
        new_valleys.append(valleys)
        n_peaks[t] = len(peaks)

    p_need = max(peak_bin.shape[0], max((len(p) for p in new_peaks), default=0))
    v_need = max(valley_bin.shape[0], max((len(v) for v in new_valleys), default=0), 1)
    if p_need > peak_bin.shape[0]:
        pad = np.full((p_need - peak_bin.shape[0], peak_bin.shape[1]), -1,
                      dtype=np.int64)
        peak_bin = np.vstack([peak_bin, pad])
    if v_need > valley_bin.shape[0]:
        pad = np.full((v_need - valley_bin.shape[0], valley_bin.shape[1]),
                      nf - 1, dtype=np.int64)
        valley_bin = np.vstack([valley_bin, pad])
    for t, peaks, valleys in zip(bad_cols, new_peaks, new_valleys):
        peak_bin[:, t] = -1
        peak_bin[:len(peaks), t] = peaks
        valley_bin[:, t] = nf - 1
        valley_bin[:len(valleys), t] = valleys
    return peak_bin, valley_bin, n_peaks


def _prune_skeleton(skel: Skeleton, max_peaks: int) -> Skeleton:
    """Keep the strongest ``max_peaks`` supports per time, merging bands."""
    nt = skel.n_times
    amp = np.where(np.isfinite(skel.peak_amp), skel.peak_amp, -np.inf)
    keep_order = np.argsort(-amp, axis=0, kind="stable")[:max_peaks]
    keep_mask = np.zeros_like(amp, dtype=bool)
    keep_mask[keep_order, np.arange(nt)[None, :]] = True
    keep_mask &= np.isfinite(skel.peak_amp)

    n_new = keep_mask.sum(axis=0)
    p_new = int(n_new.max(initial=0))
    order = np.argsort(~keep_mask, axis=0, kind="stable")[:p_new]
    tt = np.arange(nt)[None, :]
    sel = np.arange(p_new)[:, None] < n_new[None, :]

    def take(a, fill=0):
        out = a[order, tt.repeat(p_new, 0)]
        return np.where(sel, out, fill)

    sup_lo = take(skel.sup_lo)
    sup_hi = take(skel.sup_hi)
    # merged bands: kept supports absorb dropped neighbours, splitting the
    # gap at the midpoint; outermost supports extend to the grid edges
    nf = skel.tfr.freqs.size
    if p_new > 1:
        mids = (sup_hi[:-1] + sup_lo[1:]) // 2
        sup_hi[:-1] = np.where(sel[1:], mids, sup_hi[:-1])
        sup_lo[1:] = np.where(sel[1:], mids, sup_lo[1:])
    sup_lo[0] = np.where(n_new > 0, 0, sup_lo[0])
    last = np.arange(p_new)[:, None] == n_new[None, :] - 1
    sup_hi = np.where(last, nf - 1, sup_hi)

    return Skeleton(tfr=skel.tfr, n_sup=n_new.astype(np.int64),
                    sup_lo=sup_lo, sup_hi=sup_hi,
                    peak_bin=take(skel.peak_bin),
                    peak_amp=take(skel.peak_amp, np.nan),
                    omega_p=take(skel.omega_p, np.nan),
                    amp_r=take(skel.amp_r, np.nan),
                    phi_r=take(skel.phi_r, np.nan),
                    nu_r=take(skel.nu_r, np.nan))
