"""Shared fixtures.

The ~2000-level eigenvalue list used by the long-range acceptance checks takes
tens of minutes to compute, so it is cached on disk next to the tests and
recomputed only when missing.
"""

from pathlib import Path

import numpy as np
import pytest

from barrier_billiards.quantization import secular_scan
from barrier_billiards.transfer_operator import Geometry

CACHE_DIR = Path(__file__).parent / ".cache"


def compute_reference_spectrum():
    """Eigen-wavenumbers of the (a, b, h1) = (1, 1, 0.3) billiard up to k=162."""
    geometry = Geometry.from_split(1.0, 1.0, 0.3)
    scan = secular_scan(geometry, 2.0, 162.0, 0.05, n_evanescent=10)
    return scan.k_roots


@pytest.fixture(scope="session")
def reference_spectrum():
    path = CACHE_DIR / "spectrum_a1_b1_h03_k162.npy"
    if path.exists():
        return np.load(path)
    k = compute_reference_spectrum()
    CACHE_DIR.mkdir(exist_ok=True)
    np.save(path, k)
    return k
