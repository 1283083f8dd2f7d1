"""Periodic-orbit machinery: primitive orbit enumeration with signed areas,
Weyl and oscillating level densities, the f-kernel / Q-matrix mechanism behind
orbit amplitudes, and length spectra of computed eigenvalue lists.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np
from scipy.integrate import trapezoid

from .errors import ValidationError
from .transfer_operator import Geometry

__all__ = [
    "PeriodicOrbit",
    "QMatrixSpec",
    "LengthSpectrum",
    "enumerate_orbits",
    "orbit_amplitude",
    "weyl_density",
    "oscillating_density",
    "f_kernel",
    "u_hat_matrix",
    "q_matrix",
    "q_trace_prediction",
    "clustering_fraction",
    "length_spectrum",
    "peak_table",
]


@dataclass(frozen=True)
class PeriodicOrbit:
    """A primitive orbit family (M, N) of the unfolded rectangle.

    m_wind, n_wind are the co-prime winding numbers; length = sqrt((2aM)^2 +
    (2bN)^2); k_int and eta are the integer and fractional parts of N h1 / a;
    amplitude is the signed family area (-1)^K (1 - 2 eta) 4ab.  Orbits with
    n_wind = 0 run parallel to the barrier and carry boundary=True; their
    amplitude is set to the full 4ab but is not used quantitatively.
    """

    m_wind: int
    n_wind: int
    length: float
    k_int: int
    eta: float
    amplitude: float
    boundary: bool = False


@dataclass(frozen=True)
class QMatrixSpec:
    """Truncation dimension and orbit data for the phase-twisted kernel matrix.

    y = (N/M) h1/a enters the f-kernel, z = N/M the phase twist.
    """

    r_dim: int
    m_wind: int
    n_wind: int
    y: float
    z: float

    def __post_init__(self):
        if self.r_dim < 4 * self.m_wind:
            raise ValidationError("r_dim must be at least 4*m_wind")
        if gcd(self.m_wind, self.n_wind) != 1:
            raise ValidationError(
                f"(M, N) = ({self.m_wind}, {self.n_wind}) is not co-prime"
            )
        if not self.y > 0:
            raise ValidationError("y must be positive")

    @classmethod
    def from_geometry(cls, geometry: Geometry, m_wind: int, n_wind: int,
                      r_dim: int) -> "QMatrixSpec":
        z = n_wind / m_wind
        return cls(r_dim=r_dim, m_wind=m_wind, n_wind=n_wind,
                   y=z * geometry.h1 / geometry.a, z=z)


def orbit_amplitude(geometry: Geometry, n_wind: int) -> float:
    """Signed family area (-1)^K (1 - 2 eta) 4ab, K + eta = N h1 / a.

    Depends on the winding only through N h1 / a, not on M: the two sub-family
    areas are fixed by where the barrier tip cuts the unfolded strip.
    """
    t = n_wind * geometry.h1 / geometry.a
    k_int = int(np.floor(t))
    eta = t - k_int
    return (-1.0) ** k_int * (1.0 - 2.0 * eta) * 4.0 * geometry.a * geometry.b


def enumerate_orbits(geometry: Geometry, l_max: float) -> list[PeriodicOrbit]:
    """All primitive orbit families with length <= l_max, sorted by length.

    Co-prime pairs M >= 1, N >= 1 plus the boundary family (M, 0); the latter
    is tagged so that quantitative consumers can skip it.
    """
    a, b = geometry.a, geometry.b
    if not l_max > 2 * a:
        raise ValidationError(f"l_max={l_max} must exceed the shortest length {2 * a}")
    orbits = []
    orbits.append(PeriodicOrbit(1, 0, 2 * a, 0, 0.0, 4 * a * b, boundary=True))
    m_cap = int(np.floor(l_max / (2 * a)))
    for m in range(1, m_cap + 1):
        n_cap = int(np.floor(np.sqrt(max(l_max**2 - (2 * a * m) ** 2, 0.0)) / (2 * b)))
        for n in range(1, n_cap + 1):
            if gcd(m, n) != 1:
                continue
            length = np.hypot(2 * a * m, 2 * b * n)
            t = n * geometry.h1 / a
            k_int = int(np.floor(t))
            orbits.append(PeriodicOrbit(
                m, n, float(length), k_int, t - k_int,
                orbit_amplitude(geometry, n),
            ))
    orbits.sort(key=lambda o: o.length)
    return orbits


def weyl_density(geometry: Geometry) -> float:
    """Smooth level density ab/(4 pi) of the reduced quarter billiard."""
    return geometry.a * geometry.b / (4.0 * np.pi)


def oscillating_density(geometry: Geometry, orbits, k: float,
                        l_max: float | None = None) -> float:
    """Oscillating part of the level density at wavenumber k.

    Sums (1/4pi) eps_p A_p (2 pi k L)^{-1/2} e^{i(kL - pi/4)} + c.c. over the
    orbit list, including repetitions (rM, rN) of each primitive family up to
    l_max (default: longest supplied primitive length); a repetition carries
    the amplitude of its primitive, i.e. the amplitude rule applied to
    (rM, rN) reduced by the gcd.  Boundary families are skipped.
    """
    if not k > 0:
        raise ValidationError("k must be positive")
    orbits = [o for o in orbits if not o.boundary]
    if not orbits:
        return 0.0
    if l_max is None:
        l_max = max(o.length for o in orbits)
    total = 0.0
    for orbit in orbits:
        r = 1
        while r * orbit.length <= l_max:
            length = r * orbit.length
            amp = orbit.amplitude
            total += (amp / np.sqrt(2 * np.pi * k * length)
                      * np.cos(k * length - np.pi / 4))
            r += 1
    return total / (2.0 * np.pi)


# ---------------------------------------------------------------------------
# f-kernel and Q-matrix


def f_kernel(p, y: float):
    """Fourier coefficients of the sawtooth 1 - 2{x h1}: f_0 = 1 - 2{y},
    f_p = -2 sin(pi y p)/(pi p) for p != 0."""
    p = np.asarray(p)
    frac = y - np.floor(y)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(p == 0, 1.0 - 2.0 * frac,
                       -2.0 * np.sin(np.pi * y * p) / (np.pi * np.where(p == 0, 1, p)))
    return float(out) if out.ndim == 0 else out


def u_hat_matrix(r_dim: int, y: float) -> np.ndarray:
    """Band-limited projector kernel: off-diagonal sin(pi y (m-n))/(pi (m-n)),
    diagonal {y}.  Real symmetric with spectrum in [0, 1]; asymptotically {y}R
    unit eigenvalues."""
    if r_dim < 1:
        raise ValidationError("r_dim must be >= 1")
    d = np.arange(r_dim)[:, None] - np.arange(r_dim)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.where(d == 0, y - np.floor(y),
                     np.sin(np.pi * y * d) / (np.pi * np.where(d == 0, 1, d)))
    return u


def q_matrix(spec: QMatrixSpec) -> np.ndarray:
    """Phase-twisted kernel matrix Q_mn = e^{-2 pi i z m} f_{m-n}(y), R x R."""
    m = np.arange(spec.r_dim)
    f = f_kernel(m[:, None] - m[None, :], spec.y)
    return np.exp(-2j * np.pi * spec.z * m)[:, None] * f


def q_trace_prediction(spec: QMatrixSpec) -> float:
    """Large-R limit of (1/R) Tr Q^M: (-1)^K (1 - 2 eta) with K + eta = M y.

    Equals orbit_amplitude / (4ab) for the same (M, N) and geometry, tying the
    matrix mechanism to the direct family-area computation.
    """
    t = spec.m_wind * spec.y
    k_int = int(np.floor(t))
    return (-1.0) ** k_int * (1.0 - 2.0 * (t - k_int))


def clustering_fraction(eigenvalues, m_wind: int, tol: float = 0.05) -> float:
    """Fraction of eigenvalues within tol of some 2M-th root of unity."""
    lam = np.asarray(eigenvalues)
    roots = np.exp(1j * np.pi * np.arange(2 * m_wind) / m_wind)
    dist = np.abs(lam[:, None] - roots[None, :]).min(axis=1)
    return float(np.mean(dist <= tol))


# ---------------------------------------------------------------------------
# length spectrum


@dataclass
class LengthSpectrum:
    """Windowed Fourier weight |W(L)| of the fluctuating level density.

    resolution is the Fourier-limited peak width 2 pi / (k-range); oversampled
    flags an l-grid finer than that resolution.
    """

    lengths: np.ndarray
    weight: np.ndarray
    resolution: float
    oversampled: bool


def length_spectrum(k_list, l_grid, smooth_degree: int = 2) -> LengthSpectrum:
    """Hann-windowed transform of the level density onto orbit lengths.

    Each level contributes w(k_n) e^{-i k_n L} / sqrt(k_n); the smooth
    background (quadratic fit to the counting staircase) is subtracted under
    the same window, so surviving weight sits at classical lengths with height
    proportional to |family area| / sqrt(L).
    """
    k = np.sort(np.asarray(k_list, dtype=float))
    if len(k) < 200:
        raise ValidationError("need at least 200 levels for a usable length spectrum")
    l_grid = np.asarray(l_grid, dtype=float)
    k_lo, k_hi = k[0], k[-1]
    resolution = 2 * np.pi / (k_hi - k_lo)
    gaps = np.diff(l_grid)
    oversampled = bool(len(gaps) and gaps.min() < resolution / 8)

    def window(x):
        return 0.5 * (1.0 - np.cos(2 * np.pi * (x - k_lo) / (k_hi - k_lo)))

    counts = np.arange(1, len(k) + 1) - 0.5
    fit = np.polynomial.Polynomial.fit(k, counts, smooth_degree)
    rho = fit.deriv()

    discrete = (window(k) / np.sqrt(k))[None, :] * np.exp(
        -1j * np.outer(l_grid, k))
    kk = np.linspace(k_lo, k_hi, 8 * len(k))
    smooth = (window(kk) * rho(kk) / np.sqrt(kk))[None, :] * np.exp(
        -1j * np.outer(l_grid, kk))
    weight = np.abs(discrete.sum(axis=1) - trapezoid(smooth, kk, axis=1))
    return LengthSpectrum(lengths=l_grid, weight=weight,
                          resolution=resolution, oversampled=oversampled)


def peak_table(spectrum: LengthSpectrum, min_height: float = 0.0):
    """Local maxima of the length spectrum as (length, height) rows, sorted by
    height descending."""
    w = spectrum.weight
    interior = (w[1:-1] > w[:-2]) & (w[1:-1] >= w[2:]) & (w[1:-1] > min_height)
    idx = np.where(interior)[0] + 1
    order = np.argsort(w[idx])[::-1]
    return [(float(spectrum.lengths[i]), float(w[i])) for i in idx[order]]
