"""Mode basis, exact scattering matrix and transfer matrix of the symmetric
barrier billiard, their paraxial / high-energy asymptotics, and the Sommerfeld
half-plane diffraction cross-checks.

Conventions: the reduced billiard is the rectangle a x b whose top edge is
Neumann over length h1 and Dirichlet over h2 = a - h1.  Transverse channels
are indexed by a single integer n >= 1 with momenta p_n = sqrt(k^2 -
pi^2 n^2/(4b^2)); odd n live in the Neumann-top half-tube, even n in the
Dirichlet one.  Signed coordinates x alternate in sign and decrease in
modulus, which makes the finite-product channel weights |L_m|^2 positive.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IntertwiningError, OpticalBoundaryError, ThresholdError, ValidationError
from .wiener_hopf import channel_momentum, k_plus_values

__all__ = [
    "Geometry",
    "ModeSet",
    "UnitarySample",
    "build_mode_set",
    "s_matrix_exact",
    "b_matrix",
    "b_matrix_random",
    "s_paraxial",
    "s_matrix_asymptotic",
    "sommerfeld_diffraction",
    "transmitted_image_sum",
    "transmitted_channel_expansion",
    "reflected_image_sum",
    "unitarity_defect",
]


@dataclass(frozen=True)
class Geometry:
    """Rectangle of size a x b with a Neumann top segment h1 and Dirichlet h2."""

    a: float
    b: float
    h1: float
    h2: float

    def __post_init__(self):
        for name in ("a", "b", "h1", "h2"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"geometry field {name} must be positive")
        if abs(self.h1 + self.h2 - self.a) > 1e-12 * self.a:
            raise ValidationError("geometry requires h1 + h2 = a")

    @classmethod
    def from_split(cls, a: float, b: float, h1: float) -> "Geometry":
        return cls(a=a, b=b, h1=h1, h2=a - h1)


@dataclass
class ModeSet:
    """Channel data at fixed wavenumber k: momenta, signed coordinates, couplings.

    Arrays cover n_prop propagating plus any evanescent channels; l_mod2
    (the exact finite-product moduli squared) covers the propagating block only.
    """

    k: float
    b: float
    n_prop: int
    p: np.ndarray
    x: np.ndarray
    l_mod2: np.ndarray
    l: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.p)


@dataclass
class UnitarySample:
    """A dense unitary matrix plus the phase vector and seed that produced it."""

    matrix: np.ndarray
    phases: np.ndarray
    seed: int
    label: str


def _check_intertwining(x: np.ndarray):
    mods = np.abs(x)
    signs = np.sign(np.real(x))
    expect = (-1.0) ** np.arange(len(x))
    if np.any(np.diff(mods) >= 0) or np.any(signs != expect):
        raise IntertwiningError("coordinates must alternate in sign with decreasing modulus")


def _l_mod2(x: np.ndarray) -> np.ndarray:
    """Exact finite product 2 x_m prod_{j!=m} (x_m+x_j)/(x_m-x_j) over one block."""
    xs = np.real(x)
    num = xs[:, None] + xs[None, :]
    den = xs[:, None] - xs[None, :]
    np.fill_diagonal(num, 1.0)
    np.fill_diagonal(den, 1.0)
    # log-space accumulation: the factors span many orders for large blocks
    logs = np.log(np.abs(num / den)).sum(axis=1)
    sign = np.prod(np.sign(num / den), axis=1)
    vals = 2 * xs * sign * np.exp(logs)
    if np.any(vals <= 0):
        raise IntertwiningError("non-positive |L|^2; intertwining must have been violated")
    return vals


def propagating_count(k: float, b: float) -> int:
    """Number of channels with pi n/(2b) < k."""
    return int(np.floor(2 * b * k / np.pi - 1e-12))


def build_mode_set(k: float, geometry: Geometry, n_evanescent: int = 0) -> ModeSet:
    """Assemble the channel basis at wavenumber k.

    Couplings l use the corrected Wiener-Hopf factor; their propagating moduli
    are recomputed independently from the exact finite product.
    """
    if n_evanescent < 0:
        raise ValidationError("n_evanescent must be >= 0")
    b = geometry.b
    n_prop = propagating_count(k, b)
    if n_prop < 1:
        raise ValidationError(f"no propagating channel at k={k}")
    n = np.arange(1, n_prop + n_evanescent + 1)
    cutoff = np.pi * n / (2 * b)
    if np.any(np.abs(cutoff - k) <= 1e-12 * k):
        raise ThresholdError(f"k={k} sits on a channel threshold")
    p = channel_momentum(k, b, n)
    p = np.atleast_1d(p)
    x = np.where(n % 2 == 1, b * p, -b * p)
    _check_intertwining(x[:n_prop])
    l_mod2 = _l_mod2(x[:n_prop])

    kp = k_plus_values(k, b, p)
    m = (n + 1) // 2
    sqbp = np.sqrt(b * p)
    l = np.where(
        n % 2 == 1,
        (-1.0) ** m / (sqbp * kp),
        (-1.0) ** m * np.pi * m * kp / sqbp,
    )
    return ModeSet(k=k, b=b, n_prop=n_prop, p=p, x=x, l_mod2=l_mod2, l=l)


def s_matrix_exact(modes: ModeSet) -> np.ndarray:
    """Phase-stripped scattering matrix |L_n||L_m|/(x_n + x_m) on the propagating block.

    Real symmetric orthogonal with S^2 = I; the physical S is D S D with D the
    diagonal of L phases.
    """
    x = np.real(modes.x[: modes.n_prop])
    lm = np.sqrt(modes.l_mod2)
    denom = x[:, None] + x[None, :]
    assert np.all(np.abs(denom) > 0), "x_n + x_m = 0 cannot happen under intertwining"
    return np.outer(lm, lm) / denom


def b_matrix(modes: ModeSet, geometry: Geometry) -> UnitarySample:
    """Transfer matrix diag(e^{i phi}) S on the propagating block.

    phi_{2n} = 2 h2 p_{2n} (Dirichlet run), phi_{2n-1} = 2 h1 p_{2n-1}
    (Neumann run).
    """
    S = s_matrix_exact(modes)
    n = np.arange(1, modes.n_prop + 1)
    p = np.real(modes.p[: modes.n_prop])
    phases = np.where(n % 2 == 1, 2 * geometry.h1 * p, 2 * geometry.h2 * p)
    B = np.exp(1j * phases)[:, None] * S
    return UnitarySample(matrix=B, phases=phases % (2 * np.pi), seed=0,
                         label=f"B(k={modes.k:g})")


def b_matrix_random(dim: int, x, seed: int) -> UnitarySample:
    """Transfer-type ensemble member: diag(e^{i phi}) S(x) with i.i.d. uniform phases."""
    x = np.asarray(x, dtype=float)
    if len(x) != dim:
        raise ValidationError("len(x) must equal dim")
    _check_intertwining(x)
    lm = np.sqrt(_l_mod2(x))
    S = np.outer(lm, lm) / (x[:, None] + x[None, :])
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2 * np.pi, dim)
    return UnitarySample(matrix=np.exp(1j * phases)[:, None] * S, phases=phases,
                         seed=seed, label="B-random")


def s_paraxial(half_dim: int) -> np.ndarray:
    """Pole-term paraxial S-matrix: block [[0, s], [s^T, 0]] with
    s_jk = (-1)^{j+k} / (pi (k - j + 1/2))."""
    if half_dim < 1:
        raise ValidationError("half_dim must be >= 1")
    j = np.arange(1, half_dim + 1)
    s = (-1.0) ** (j[:, None] + j[None, :]) / (np.pi * (j[None, :] - j[:, None] + 0.5))
    out = np.zeros((2 * half_dim, 2 * half_dim))
    out[:half_dim, half_dim:] = s
    out[half_dim:, :half_dim] = s.T
    return out


def _p_even(k, b, m):
    return np.sqrt(np.asarray(k**2 - np.pi**2 * m**2 / b**2, dtype=complex))


def _p_odd(k, b, n):
    return np.sqrt(np.asarray(k**2 - np.pi**2 * (n - 0.5) ** 2 / b**2, dtype=complex))


def s_matrix_asymptotic(k: float, b: float, n: int, m: int, pair: str = "odd-even"):
    """High-momentum closed forms of the propagating S elements.

    `pair` selects the parity combination of the physical indices:
    "odd-even" -> S_{2n-1,2m}, "odd-odd" -> S_{2n-1,2m-1},
    "even-even" -> S_{2n,2m}.
    """
    sgn = (-1.0) ** (m + n)
    if pair == "odd-even":
        pn = _p_odd(k, b, n)
        pm = _p_even(k, b, m)
        if abs(pn - pm) < 1e-12 * k:
            raise ValidationError(f"resonant denominator p_(2n-1)=p_(2m) at n={n}, m={m}")
        return complex(
            sgn * np.pi * m * np.sqrt(k + pn)
            / (b**2 * (pn - pm) * np.sqrt(pn * pm * (k + pm)))
        )
    if pair == "odd-odd":
        pn = _p_odd(k, b, n)
        pm = _p_odd(k, b, m)
        return complex(
            -1j * sgn * np.sqrt((k + pn) * (k + pm)) / (b * (pn + pm) * np.sqrt(pn * pm))
        )
    if pair == "even-even":
        pn = _p_even(k, b, n)
        pm = _p_even(k, b, m)
        return complex(
            -1j * sgn * np.pi**2 * n * m
            / (b**3 * (pn + pm) * np.sqrt(pn * pm * (k + pn) * (k + pm)))
        )
    raise ValidationError(f"unknown parity pair {pair!r}")


def sommerfeld_diffraction(theta_i: float, theta: float, tol: float = 1e-6) -> float:
    """Half-plane diffraction coefficient 1/cos((t-ti)/2) - 1/cos((t+ti)/2)."""
    c1 = np.cos((theta - theta_i) / 2)
    c2 = np.cos((theta + theta_i) / 2)
    if min(abs(c1), abs(c2)) < tol:
        raise OpticalBoundaryError(
            f"direction theta={theta:.6f} lies on an optical boundary pi +/- theta_i"
        )
    return float(1.0 / c1 - 1.0 / c2)


def _channel_diffraction(phi, theta):
    # D with the incident wave split theta_i = pi +/- phi already carried out
    return 1.0 / np.sin((theta + phi) / 2) + 1.0 / np.sin((theta - phi) / 2)


def _scattered_wave(k, b, n, R, theta):
    p_in = np.real(_p_odd(k, b, n))
    C = -((-1.0) ** n) / np.sqrt(b * p_in)
    phi = np.arccos(p_in / k)
    D = _channel_diffraction(phi, theta)
    return C * D * np.exp(1j * k * R - 3j * np.pi / 4) / np.sqrt(8 * np.pi * k * R)


def _image_sum(k, b, n, x, y, r_max, alternate: bool):
    r = np.arange(-r_max, r_max + 1)
    terms = []
    for sign in (-1.0, +1.0):
        z = b + sign * y + 2 * b * r
        R = np.hypot(x, z)
        # directed ray angle: the diffraction coefficient is odd in it, which
        # is what the saddle-point identification of the channel sum requires
        theta = np.arctan2(z, x)
        w = _scattered_wave(k, b, n, R, theta)
        terms.append(-sign * w)
    tot = terms[0] + terms[1]
    if alternate:
        tot = tot * (-1.0) ** np.abs(r)
    # Cesaro-average the tail of the partial sums: the series converges only
    # in the oscillatory mean
    csum = np.cumsum(tot[np.argsort(np.abs(r), kind="stable")])
    tail = csum[3 * len(csum) // 4:]
    value = tail.mean()
    residual = float(np.std(tail))
    return complex(value), residual


def transmitted_image_sum(k, b, n, x, y, r_max=20000):
    """Partial image sum of Sommerfeld waves on the transmitted side (x > 0).

    Returns (field value, residual estimate); residual is the spread of the
    tail partial sums.
    """
    if not x > 0:
        raise ValidationError("transmitted side requires x > 0")
    return _image_sum(k, b, n, x, y, r_max, alternate=False)


def reflected_image_sum(k, b, n, x, y, r_max=20000):
    """Image sum with (-1)^r weights, valid on the reflected (Neumann-top) side."""
    return _image_sum(k, b, n, x, y, r_max, alternate=True)


def transmitted_channel_expansion(k, b, n, x, y):
    """Propagating-channel expansion sum_m S^{as}_{2n-1,2m} e^{i x p_2m} sin(pi m y/b)/sqrt(b p_2m)."""
    m_max = int(np.floor(b * k / np.pi - 1e-12))
    total = 0j
    for m in range(1, m_max + 1):
        pm = np.real(_p_even(k, b, m))
        s = s_matrix_asymptotic(k, b, n, m, "odd-even")
        total += s * np.exp(1j * x * pm) * np.sin(np.pi * m * y / b) / np.sqrt(b * pm)
    return total


def unitarity_defect(matrix: np.ndarray) -> float:
    """Max-entry norm of M^dagger M - I."""
    m = np.asarray(matrix)
    return float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max())
