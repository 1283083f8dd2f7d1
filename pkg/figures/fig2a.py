"""Nearest-neighbour spacing laws of the fully coupled random ensembles.

Consumes three `ensemble` runs of the phase-ensemble sampler at coupling
alpha = 1/2, with matrix dimensions 3, 5 and 301, and overlays the exact
finite-dimension laws (8/9) s and (48/25) s (1 - 2s/5)^2 together with the
semi-Poisson limit 4 s e^(-2s).

Usage: python fig2a.py RUN_N3 RUN_N5 RUN_N301 [--output fig2a.png]
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import common
from common import FigureDataError, require


EXPECTED_DIMS = (3, 5, 301)


def load_runs(paths):
    runs = {}
    for path in paths:
        manifest, run_dir = common.load_manifest(path)
        require(manifest["command"] == "ensemble",
                f"{path}: expected an 'ensemble' run, got '{manifest['command']}'")
        cfg = manifest["config"]
        require(cfg.get("kind") == "lax",
                f"{path}: expected kind 'lax', got {cfg.get('kind')!r}")
        alpha = cfg.get("alpha")
        require(alpha is not None and abs(alpha - 0.5) < 1e-12,
                f"{path}: expected coupling alpha = 1/2, got {alpha!r}")
        dim = int(cfg["dim"])
        require(dim in EXPECTED_DIMS,
                f"{path}: dimension {dim} not one of {EXPECTED_DIMS}")
        require(dim not in runs, f"duplicate run for dimension {dim}")
        runs[dim] = common.read_spacing_histogram(run_dir, order=0)
    missing = sorted(set(EXPECTED_DIMS) - set(runs))
    require(not missing, f"missing runs for dimensions {missing}")
    return runs


def render(runs, output):
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    markers = {3: "o", 5: "s", 301: "^"}
    for dim in EXPECTED_DIMS:
        data = runs[dim]
        ax.plot(data["s_bin_center"], data["density"], markers[dim],
                ms=3.5, ls="none", label=f"N = {dim}")
    s = np.linspace(0.0, 4.0, 600)
    ax.plot(s, common.nn_law_half_coupling(3, s), "-", color="C0", lw=1)
    ax.plot(s, common.nn_law_half_coupling(5, s), "-", color="C1", lw=1)
    ax.plot(s, common.semi_poisson(0, s), "-", color="C2", lw=1)
    ax.set_xlabel("s")
    ax.set_ylabel(r"$P_0(s)$")
    ax.set_xlim(0.0, 4.0)
    ax.set_ylim(bottom=0.0)
    ax.legend(frameon=False)
    common.save_figure(fig, output)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("runs", nargs=3,
                        help="run directories (or manifests) for N = 3, 5, 301")
    parser.add_argument("--output", default="fig2a.png")
    args = parser.parse_args(argv)
    try:
        render(load_runs(args.runs), args.output)
    except FigureDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
