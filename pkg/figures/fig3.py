"""Spacing distributions of the product-kernel ensemble against semi-Poisson.

Main panel: orders 0-3 nearest-neighbour and higher-order spacing histograms
of one `ensemble` run of kind `xi`, overlaid with the semi-Poisson family
P_n(s) = 2^(2n+2)/(2n+1)! s^(2n+1) e^(-2s).  Inset: the nearest-neighbour
histogram of one `ensemble` run of kind `c`, overlaid with the hard-gap
shifted-Poisson law 2 e^(1 - 2s).

Usage: python fig3.py XI_RUN C_RUN [--output fig3.png]
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import common
from common import FigureDataError, require


N_ORDERS = 4


def load_runs(xi_path, c_path):
    manifest, run_dir = common.load_manifest(xi_path)
    require(manifest["command"] == "ensemble",
            f"{xi_path}: expected an 'ensemble' run, got '{manifest['command']}'")
    cfg = manifest["config"]
    require(cfg.get("kind") == "xi",
            f"{xi_path}: expected kind 'xi', got {cfg.get('kind')!r}")
    require(int(cfg.get("orders", 1)) >= N_ORDERS,
            f"{xi_path}: needs at least {N_ORDERS} spacing orders")
    xi = [common.read_spacing_histogram(run_dir, order=n) for n in range(N_ORDERS)]

    manifest, run_dir = common.load_manifest(c_path)
    require(manifest["command"] == "ensemble",
            f"{c_path}: expected an 'ensemble' run, got '{manifest['command']}'")
    cfg = manifest["config"]
    require(cfg.get("kind") == "c",
            f"{c_path}: expected kind 'c', got {cfg.get('kind')!r}")
    c_data = common.read_spacing_histogram(run_dir, order=0)
    return xi, c_data


def render(xi, c_data, output):
    fig, ax = plt.subplots(figsize=(6.4, 4.6))
    s_hi = max(data["s_bin_center"].max() for data in xi)
    s = np.linspace(0.0, s_hi, 800)
    for n, data in enumerate(xi):
        ax.plot(data["s_bin_center"], data["density"], "o", ms=3,
                ls="none", color=f"C{n}", label=f"n = {n}")
        ax.plot(s, common.semi_poisson(n, s), "-", lw=1, color=f"C{n}")
    ax.set_xlabel("s")
    ax.set_ylabel(r"$P_n(s)$")
    ax.set_xlim(0.0, s_hi)
    ax.set_ylim(bottom=0.0)
    ax.legend(frameon=False, loc="upper right")

    inset = ax.inset_axes([0.58, 0.35, 0.38, 0.38])
    inset.plot(c_data["s_bin_center"], c_data["density"], "o", ms=2,
               ls="none", color="C4")
    s_in = np.linspace(0.0, c_data["s_bin_center"].max(), 400)
    inset.plot(s_in, common.shifted_poisson(s_in), "-", lw=1, color="k")
    inset.set_xlabel("s", fontsize=8)
    inset.set_ylabel(r"$P_0(s)$", fontsize=8)
    inset.tick_params(labelsize=7)
    common.save_figure(fig, output)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("xi_run", help="run directory (or manifest) of kind 'xi'")
    parser.add_argument("c_run", help="run directory (or manifest) of kind 'c'")
    parser.add_argument("--output", default="fig3.png")
    args = parser.parse_args(argv)
    try:
        xi, c_data = load_runs(args.xi_run, args.c_run)
        render(xi, c_data, args.output)
    except FigureDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
