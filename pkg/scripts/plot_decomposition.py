"""Visual check of a decomposition against the ground truth.

Generates a benchmark signal, decomposes it, and writes a figure with
the raw record, each extracted mode next to its true counterpart, and
the residual. Useful when tuning recipes or inspecting a failing seed.

Usage:
    python3 scripts/plot_decomposition.py --recipe example2 --seed 0 \
        -o /tmp/example2_seed0.png
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from nmd.orchestrator import DecomposeConfig, DecompositionError, decompose
from nmd.synth import SynthSpec, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--recipe", default="example2")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--kind", default="wft")
    ap.add_argument("-o", "--output", default="decomposition.png")
    args = ap.parse_args()

    sig, truth = generate(SynthSpec(recipe=args.recipe, seed=args.seed))
    try:
        res = decompose(sig, DecomposeConfig(seed=args.seed, kind=args.kind))
    except DecompositionError as exc:
        print(f"decomposition failed: {exc}; plotting partial result")
        res = exc.partial

    modes = res.modes if res else []
    t = np.arange(sig.n) / sig.fs
    rows = 2 + max(len(modes), len(truth.modes))
    fig, axes = plt.subplots(rows, 1, figsize=(10, 2.2 * rows),
                             sharex=True)
    axes[0].plot(t, sig.samples, lw=0.4, color="k")
    axes[0].set_ylabel("signal")
    for i in range(rows - 2):
        ax = axes[1 + i]
        if i < len(truth.modes):
            ax.plot(t, truth.modes[i].series, lw=0.6, label="true")
        if i < len(modes):
            ax.plot(t, modes[i].series, lw=0.6, label="extracted")
            ax.set_title(f"harmonics {modes[i].harmonic_set}", fontsize=8)
        ax.set_ylabel(f"mode {i}")
        ax.legend(fontsize=7, loc="upper right")
    resid = res.residual.samples if res else sig.samples
    axes[-1].plot(t, resid, lw=0.4, color="gray")
    axes[-1].set_ylabel("residual")
    axes[-1].set_xlabel("time [s]")
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
