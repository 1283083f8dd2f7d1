"""Ratio of the corrected factor product to its high-frequency asymptotics.

Consumes two `kplus` sweep runs at wavenumbers k = 200 (thick lines) and
k = 500 (thin lines) and plots the real and imaginary parts of the ratio
K_+ / K_+^asympt against the spectral parameter alpha.

Usage: python fig4a.py RUN_K200 RUN_K500 [--output fig4a.png]
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

import common
from common import FigureDataError, require


EXPECTED_KS = (200.0, 500.0)


def load_runs(paths):
    runs = {}
    for path in paths:
        manifest, run_dir = common.load_manifest(path)
        require(manifest["command"] == "kplus",
                f"{path}: expected a 'kplus' run, got '{manifest['command']}'")
        cfg = manifest["config"]
        require(not cfg.get("raw", False),
                f"{path}: expected a corrected sweep, got a raw product")
        k = float(cfg["k"])
        require(k in EXPECTED_KS, f"{path}: wavenumber {k} not in {EXPECTED_KS}")
        require(k not in runs, f"duplicate run for k = {k}")
        data = common.read_kplus(run_dir)
        require(len(data["alpha_re"]) > 1,
                f"{path}: a sweep over alpha is required")
        runs[k] = data
    missing = sorted(set(EXPECTED_KS) - set(runs))
    require(not missing, f"missing runs for k = {missing}")
    return runs


def render(runs, output):
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for k, lw in zip(EXPECTED_KS, (2.0, 0.9)):
        data = runs[k]
        x = data["alpha_re"] / k
        ax.plot(x, data["ratio_to_asymptotic_re"], "-", lw=lw, color="C0",
                label=f"Re, k = {k:g}")
        ax.plot(x, data["ratio_to_asymptotic_im"], "-", lw=lw, color="C1",
                label=f"Im, k = {k:g}")
    ax.axhline(1.0, color="0.6", lw=0.6, zorder=0)
    ax.axhline(0.0, color="0.6", lw=0.6, zorder=0)
    ax.set_xlabel(r"$\alpha / k$")
    ax.set_ylabel(r"$K_+ / K_+^{\rm asympt}$")
    ax.legend(frameon=False, ncol=2, fontsize=9)
    common.save_figure(fig, output)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("runs", nargs=2,
                        help="run directories (or manifests) for k = 200 and 500")
    parser.add_argument("--output", default="fig4a.png")
    args = parser.parse_args(argv)
    try:
        render(load_runs(args.runs), args.output)
    except FigureDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
