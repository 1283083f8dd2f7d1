"""Shared plumbing for the figure scripts.

Each script consumes one or more run directories produced by the batch CLI
(``python -m barrier_billiards ...``), identified by their ``manifest.json``.
Data are read only from the CSV files listed in the manifest; reference curves
are re-evaluated here from the closed forms so the figures double as an
independent check of the library implementations.

Any schema mismatch (wrong command, wrong columns, missing file) or an empty
data file raises :class:`FigureDataError`; the scripts translate that into a
non-zero exit code.
"""

import csv
import json
import os

import numpy as np


class FigureDataError(Exception):
    """Raised when a run directory does not match the expected schema."""


def load_manifest(path):
    """Read and structurally validate a run manifest.

    `path` may point at the manifest itself or at the run directory that
    contains it.  Returns (manifest dict, run directory).
    """
    if os.path.isdir(path):
        path = os.path.join(path, "manifest.json")
    if not os.path.isfile(path):
        raise FigureDataError(f"manifest not found: {path}")
    try:
        with open(path) as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FigureDataError(f"unreadable manifest {path}: {exc}") from None
    for key in ("command", "config", "outputs"):
        if key not in manifest:
            raise FigureDataError(f"manifest {path} lacks required key '{key}'")
    return manifest, os.path.dirname(os.path.abspath(path))


def require(condition, message):
    if not condition:
        raise FigureDataError(message)


def read_csv(run_dir, name, columns):
    """Load a CSV with an exact expected header into a dict of float arrays."""
    path = os.path.join(run_dir, name)
    if not os.path.isfile(path):
        raise FigureDataError(f"missing data file: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FigureDataError(f"{path}: empty file") from None
        if header != list(columns):
            raise FigureDataError(
                f"{path}: schema mismatch, found columns {header}, "
                f"expected {list(columns)}")
        rows = [row for row in reader if row]
    if not rows:
        raise FigureDataError(f"{path}: no data rows")
    data = np.array(rows, dtype=float)
    return {col: data[:, i] for i, col in enumerate(columns)}


def read_spacing_histogram(run_dir, order=0):
    """The order-`order` spacing histogram written by the `ensemble` command."""
    return read_csv(run_dir, f"pn_{order}.csv",
                    ["s_bin_center", "density", "law_reference_density",
                     "realisations", "seed"])


def read_kplus(run_dir):
    """The factor sweep written by the `kplus` command."""
    return read_csv(run_dir, "kplus.csv",
                    ["alpha_re", "alpha_im", "kplus_re", "kplus_im",
                     "ratio_to_asymptotic_re", "ratio_to_asymptotic_im"])


# ---------------------------------------------------------------------------
# closed-form reference curves (independent of the library)


def nn_law_half_coupling(n, s):
    """Nearest-neighbour law of the fully coupled n = 3 / n = 5 ensembles."""
    s = np.asarray(s, dtype=float)
    if n == 3:
        return np.where(s < 1.5, 8.0 * s / 9.0, 0.0)
    if n == 5:
        return np.where(s < 2.5, (48.0 / 25.0) * s * (1.0 - 0.4 * s) ** 2, 0.0)
    raise ValueError("closed form available for n = 3 and n = 5 only")


def nn_law_hard_rod(n, s):
    """Nearest-neighbour law of the hard-rod coupled n = 3 / n = 5 ensembles."""
    s = np.asarray(s, dtype=float)
    if n == 3:
        return np.where((s > 0.5) & (s < 2.0), (16.0 / 9.0) * (1.0 - s / 2.0), 0.0)
    if n == 5:
        return np.where((s > 0.5) & (s < 3.0),
                        (1728.0 / 625.0) * (1.0 - s / 3.0) ** 3, 0.0)
    raise ValueError("closed form available for n = 3 and n = 5 only")


def semi_poisson(order, s):
    """Limiting spacing laws P_n(s) = 2^(2n+2)/(2n+1)! s^(2n+1) e^(-2s)."""
    from math import factorial
    s = np.asarray(s, dtype=float)
    n = order
    return 2.0 ** (2 * n + 2) / factorial(2 * n + 1) * s ** (2 * n + 1) * np.exp(-2.0 * s)


def shifted_poisson(s):
    """Hard-gap limiting law 2 e^(1 - 2s) for s > 1/2."""
    s = np.asarray(s, dtype=float)
    return np.where(s > 0.5, 2.0 * np.exp(1.0 - 2.0 * s), 0.0)


def save_figure(fig, output):
    out_dir = os.path.dirname(os.path.abspath(output))
    os.makedirs(out_dir, exist_ok=True)
    fig.savefig(output, dpi=200, bbox_inches="tight")
