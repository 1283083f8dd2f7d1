"""Convergence of the factor product with the number of retained factors.

Consumes a collection of single-alpha `kplus` runs sharing the same
(k, b, alpha) but differing in the number of product factors, some computed
with the tail correction (thick lines) and some without (thin lines), and
plots the real and imaginary parts of K_+ against the factor count.

Usage: python fig4b.py RUN [RUN ...] [--output fig4b.png]
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import common
from common import FigureDataError, require


def load_runs(paths):
    points = {True: [], False: []}
    shared = None
    for path in paths:
        manifest, run_dir = common.load_manifest(path)
        require(manifest["command"] == "kplus",
                f"{path}: expected a 'kplus' run, got '{manifest['command']}'")
        cfg = manifest["config"]
        require(cfg.get("alpha") is not None and cfg.get("alpha_sweep") is None,
                f"{path}: expected a single-alpha run, not a sweep")
        key = (float(cfg["k"]), float(cfg["b"]), float(cfg["alpha"]))
        if shared is None:
            shared = key
        require(key == shared,
                f"{path}: (k, b, alpha) = {key} differs from {shared}")
        data = common.read_kplus(run_dir)
        require(len(data["kplus_re"]) == 1,
                f"{path}: expected exactly one alpha value")
        corrected = not cfg.get("raw", False)
        points[corrected].append((int(cfg["n_terms"]),
                                  data["kplus_re"][0], data["kplus_im"][0]))
    for corrected, label in ((True, "corrected"), (False, "raw")):
        require(len(points[corrected]) >= 2,
                f"need at least two {label} runs with different factor counts")
    return {c: np.array(sorted(pts)) for c, pts in points.items()}, shared


def render(points, shared, output):
    k, b, alpha = shared
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for corrected, lw, tag in ((False, 0.9, "raw"), (True, 2.0, "corrected")):
        pts = points[corrected]
        ax.semilogx(pts[:, 0], pts[:, 1], "-o", lw=lw, ms=3, color="C0",
                    label=f"Re, {tag}")
        ax.semilogx(pts[:, 0], pts[:, 2], "-o", lw=lw, ms=3, color="C1",
                    label=f"Im, {tag}")
    ax.set_xlabel("number of factors N")
    ax.set_ylabel(r"$K_+$")
    ax.set_title(rf"$k = {k:g},\ b = {b:g},\ \alpha = {alpha:g}$", fontsize=10)
    ax.legend(frameon=False, fontsize=9)
    common.save_figure(fig, output)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("runs", nargs="+",
                        help="single-alpha run directories differing in --n-terms")
    parser.add_argument("--output", default="fig4b.png")
    args = parser.parse_args(argv)
    try:
        points, shared = load_runs(args.runs)
        render(points, shared, args.output)
    except FigureDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
