"""Ridge-curve extraction by penalized dynamic programming.

The curve maximizes a path functional combining log peak amplitude with
penalties on frequency jumps and on distance from the curve's own mean
frequency.  Since the penalty statistics describe the curve being sought,
the optimum is found by fixed-point iteration: each pass runs exact DP with
statistics frozen from the previous pass's path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tfr import WT, DegenerateInputError, Skeleton

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency
    njit = None

MAX_PASSES = 10

#: relative std threshold below which a penalty term is dropped
ZERO_STD_TOL = 1e-12


@dataclass
class RidgeCurve:
    """One chosen support/peak per time index."""

    sup_idx: np.ndarray        # (N,) support index into the skeleton
    omega_p: np.ndarray        # (N,) interpolated peak frequency (rad/s)
    peak_bin: np.ndarray       # (N,) frequency bin of the chosen peak
    functional_value: float
    filled: np.ndarray         # (N,) True where the time had no peaks

    @property
    def n_times(self) -> int:
        return self.sup_idx.size


def _dp_pass_py(logamp, freq, n_sup, mean_dw, inv_std_dw, mean_w, inv_std_w):
    """Pure-python fallback mirroring the numba kernel (tests, no-jit envs)."""
    p, n = logamp.shape
    score = np.full((p, n), -np.inf)
    back = np.zeros((p, n), dtype=np.int64)
    node = logamp - 0.5 * ((freq - mean_w) * inv_std_w) ** 2
    score[:n_sup[0], 0] = node[:n_sup[0], 0]
    for t in range(1, n):
        for m in range(n_sup[t]):
            best = -np.inf
            arg = 0
            for mp in range(n_sup[t - 1]):
                jump = (freq[m, t] - freq[mp, t - 1]) - mean_dw
                cand = score[mp, t - 1] - 0.5 * (jump * inv_std_dw) ** 2
                if cand > best:
                    best = cand
                    arg = mp
            score[m, t] = best + node[m, t]
            back[m, t] = arg
    path = np.zeros(n, dtype=np.int64)
    path[-1] = int(np.argmax(score[:n_sup[-1], -1]))
    for t in range(n - 1, 0, -1):
        path[t - 1] = back[path[t], t]
    return path, float(score[path[-1], -1])


if njit is not None:
    _dp_pass = njit(cache=True)(_dp_pass_py)
else:  # pragma: no cover
    _dp_pass = _dp_pass_py


def path_functional(logamp, freq, path, mean_dw, std_dw, mean_w, std_w,
                    use_dw=True, use_w=True):
    """Evaluate the path functional for a given path and fixed statistics."""
    n = path.size
    idx = (path, np.arange(n))
    total = float(np.sum(logamp[idx]))
    f = freq[idx]
    if use_w and std_w > 0:
        total -= 0.5 * float(np.sum(((f - mean_w) / std_w) ** 2))
    if use_dw and std_dw > 0 and n > 1:
        d = np.diff(f)
        total -= 0.5 * float(np.sum(((d - mean_dw) / std_dw) ** 2))
    return total


def extract_ridge(skeleton: Skeleton, kind: str | None = None,
                  max_passes: int = MAX_PASSES) -> RidgeCurve:
    """Extract the dominant ridge curve from a TFR skeleton.

    Pass 0 takes the per-time amplitude maxima; each further pass runs exact
    DP over the peaks with penalty statistics frozen from the previous path,
    until the path stops changing.  For the WT all frequency arithmetic is
    done in log-frequency.  Ties resolve to the lower-frequency peak.
    """
    if kind is None:
        kind = skeleton.tfr.kind
    n = skeleton.n_times
    if n < 2:
        raise DegenerateInputError("need at least 2 time steps")

    n_sup = skeleton.n_sup.copy()
    filled = n_sup == 0
    if filled.all():
        raise DegenerateInputError("skeleton has no peaks at any time")

    p_max = max(skeleton.max_sup, 1)
    logamp = np.full((p_max, n), -np.inf)
    freq = np.zeros((p_max, n))
    ok = np.arange(p_max)[:, None] < n_sup[None, :]
    if skeleton.max_sup:
        with np.errstate(divide="ignore", invalid="ignore"):
            la = np.log(skeleton.peak_amp)
        logamp[:skeleton.max_sup][ok[:skeleton.max_sup]] = \
            la[ok[:skeleton.max_sup]]
        w = skeleton.omega_p
        if kind == WT:
            w = np.log(w)
        freq[:skeleton.max_sup][ok[:skeleton.max_sup]] = w[ok[:skeleton.max_sup]]
    logamp[~np.isfinite(logamp)] = -1e30

    # bridge empty times with the nearest non-empty time's strongest peak;
    # the huge negative node cost cancels across candidate paths
    if filled.any():
        good = np.nonzero(~filled)[0]
        for t in np.nonzero(filled)[0]:
            src = good[np.argmin(np.abs(good - t))]
            m = int(np.argmax(logamp[:n_sup[src], src]))
            freq[0, t] = freq[m, src]
            logamp[0, t] = -1e30
            n_sup[t] = 1

    # pass 0: per-time amplitude maxima
    path = np.argmax(logamp, axis=0).astype(np.int64)

    use = ~filled if filled.any() else slice(None)
    value = -np.inf
    for _ in range(max_passes):
        f = freq[path, np.arange(n)]
        fu = f[use]
        mean_w = float(np.mean(fu))
        std_w = float(np.std(fu))
        d = np.diff(fu)
        mean_dw = float(np.mean(d)) if d.size else 0.0
        std_dw = float(np.std(d)) if d.size else 0.0

        scale = max(abs(mean_w), 1.0)
        inv_std_w = 1.0 / std_w if std_w > ZERO_STD_TOL * scale else 0.0
        inv_std_dw = 1.0 / std_dw if std_dw > ZERO_STD_TOL * scale else 0.0

        new_path, value = _dp_pass(logamp, freq, n_sup, mean_dw, inv_std_dw,
                                   mean_w, inv_std_w)
        if np.array_equal(new_path, path):
            path = new_path
            break
        path = new_path

    safe = np.minimum(path, np.maximum(skeleton.max_sup - 1, 0))
    cols = np.arange(n)
    omega_p = skeleton.omega_p[safe, cols] if skeleton.max_sup else np.zeros(n)
    peak_bin = skeleton.peak_bin[safe, cols] if skeleton.max_sup \
        else np.zeros(n, dtype=np.int64)
    # bridged times: inherit the nearest real peak
    if filled.any():
        good = np.nonzero(~filled)[0]
        for t in np.nonzero(filled)[0]:
            src = good[np.argmin(np.abs(good - t))]
            omega_p[t] = omega_p[src]
            peak_bin[t] = peak_bin[src]
    return RidgeCurve(sup_idx=path, omega_p=omega_p, peak_bin=peak_bin,
                      functional_value=value, filled=filled)
