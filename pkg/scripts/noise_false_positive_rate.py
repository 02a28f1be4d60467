"""False-positive rate of the decomposition on pure noise.

Feeds pure white or Brownian noise records to the decomposition and
counts how often any oscillatory mode is (wrongly) extracted. The
stopping test should declare the record noise immediately, so the
expected mode count is zero for every seed.

Usage:
    python3 scripts/noise_false_positive_rate.py --kind white --seeds 20
"""

import argparse
import time

import numpy as np

from nmd.orchestrator import DecomposeConfig, DecompositionError, decompose
from nmd.tfr import Signal


def make_noise(kind, n, sigma, rng):
    x = rng.standard_normal(n)
    if kind == "brownian":
        x = np.cumsum(x)
        x = sigma * x / np.std(x)
    else:
        x = sigma * x
    return x


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kind", default="white",
                    choices=("white", "brownian"))
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--fs", type=float, default=100.0)
    ap.add_argument("--duration", type=float, default=100.0)
    ap.add_argument("--sigma", type=float, default=1.0)
    args = ap.parse_args()

    n = int(round(args.fs * args.duration))
    false_pos = 0
    for seed in range(args.seeds):
        rng = np.random.default_rng(seed)
        sig = Signal(make_noise(args.kind, n, args.sigma, rng), args.fs)
        t0 = time.time()
        try:
            res = decompose(sig, DecomposeConfig(seed=10_000 + seed))
        except DecompositionError as exc:
            res = exc.partial
        n_modes = len(res.modes) if res else 0
        false_pos += n_modes > 0
        print(f"seed {seed:3d}: {time.time() - t0:5.0f}s "
              f"modes={n_modes}", flush=True)
    print(f"\nfalse positives: {false_pos}/{args.seeds}")


if __name__ == "__main__":
    main()
