"""Ruijsenaars-Schneider Lax matrices, the A / c / C / xi random unitary
ensembles, samplers of their allowed angle regions, and closed-form finite-N
spacing laws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import NumericalAbort, ValidationError
from .transfer_operator import UnitarySample

__all__ = [
    "LaxConfiguration",
    "SpacingLaw",
    "lax_matrix",
    "sample_omega_half",
    "sample_omega_hard_rod",
    "a_matrix",
    "c_matrix",
    "big_c_matrix",
    "xi_matrix",
    "spacing_law_eval",
    "sigma_matrix",
    "z_matrix",
    "eigenphases",
]


@dataclass
class LaxConfiguration:
    """Dimension, coupling alpha, angle vector in the allowed region, phase vector."""

    n: int
    alpha: float
    theta: np.ndarray
    phases: np.ndarray


def sample_omega_half(n: int, seed) -> np.ndarray:
    """Angles for alpha = 1/2: n-1 uniform points on (0, pi) sorted with 0
    prepended, every even-indexed entry shifted by pi."""
    if n < 3 or n % 2 == 0:
        raise ValidationError("alpha=1/2 region needs odd n >= 3")
    rng = np.random.default_rng(seed)
    z = np.concatenate([[0.0], np.sort(rng.uniform(0.0, np.pi, n - 1))])
    theta = z.copy()
    theta[1::2] += np.pi
    return theta


def sample_omega_hard_rod(n: int, seed) -> np.ndarray:
    """Angles for alpha = 1/(2n): points on the circle with all gaps > pi/n.

    Standard hard-rod construction: every gap is pi/n plus a uniform partition
    of the free circumference pi.
    """
    if n < 2:
        raise ValidationError("hard-rod region needs n >= 2")
    rng = np.random.default_rng(seed)
    cuts = np.sort(rng.uniform(0.0, np.pi, n - 1))
    excess = np.diff(np.concatenate([[0.0], cuts, [np.pi]]))
    gaps = np.pi / n + excess
    return np.concatenate([[0.0], np.cumsum(gaps[:-1])])


def _w_v_squared(theta: np.ndarray, alpha: float):
    half = (theta[:, None] - theta[None, :]) / 2
    sin_half = np.sin(half)
    np.fill_diagonal(sin_half, 1.0)
    plus = np.sin(half + np.pi * alpha)
    minus = np.sin(half - np.pi * alpha)
    np.fill_diagonal(plus, 1.0)
    np.fill_diagonal(minus, 1.0)
    w2 = np.prod(plus / sin_half, axis=1)
    v2 = np.prod(minus / sin_half, axis=1)
    return w2, v2


def lax_matrix(config: LaxConfiguration) -> UnitarySample:
    """Lax matrix e^{i phi_n} W_n sin(pi alpha)/sin((th_n - th_m)/2 + pi alpha) V_m.

    W, V enter through the moduli of their squared products; the allowed
    region guarantees W^2 and V^2 share signs index by index.
    """
    theta = np.asarray(config.theta, dtype=float)
    n = config.n
    if len(theta) != n or len(config.phases) != n:
        raise ValidationError("theta and phases must have length n")
    diff = theta[:, None] - theta[None, :]
    off = np.abs(diff[~np.eye(n, dtype=bool)])
    if np.min(np.minimum(off, 2 * np.pi - off)) < 1e-12:
        raise ValidationError("coincident angles theta_n = theta_m")
    w2, v2 = _w_v_squared(theta, config.alpha)
    if np.any(np.sign(w2) != np.sign(v2)):
        raise ValidationError("W^2 and V^2 signs differ; theta is outside the allowed region")
    core = np.sin(np.pi * config.alpha) / np.sin(diff / 2 + np.pi * config.alpha)
    m = np.sqrt(np.abs(w2))[:, None] * core * np.sqrt(np.abs(v2))[None, :]
    matrix = np.exp(1j * config.phases)[:, None] * m
    return UnitarySample(matrix=matrix, phases=np.asarray(config.phases), seed=-1,
                         label=f"lax(alpha={config.alpha:g})")


def sigma_matrix(n: int) -> np.ndarray:
    """Equal-spacing alpha=1/2 kernel 1/(n cos(pi (j - k)/n)), odd n."""
    if n % 2 == 0:
        raise ValidationError("sigma matrix needs odd n")
    j = np.arange(n)
    return 1.0 / (n * np.cos(np.pi * (j[:, None] - j[None, :]) / n))


def z_matrix(n0: int) -> np.ndarray:
    """Equal-spacing alpha=1/(2n) kernel 1/(n0 sin(pi (m - n + 1/2)/n0))."""
    j = np.arange(n0)
    return 1.0 / (n0 * np.sin(np.pi * (j[None, :] - j[:, None] + 0.5) / n0))


def _phased(kernel: np.ndarray, seed, label: str) -> UnitarySample:
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0.0, 2 * np.pi, kernel.shape[0])
    return UnitarySample(matrix=np.exp(1j * phases)[:, None] * kernel,
                         phases=phases, seed=seed, label=label)


def a_matrix(n: int, seed) -> UnitarySample:
    """Model-A member: random phases times the Sigma kernel (odd n only)."""
    if n % 2 == 0:
        raise ValidationError("model A needs odd n")
    return _phased(sigma_matrix(n), seed, "A")


def c_matrix(n0: int, seed) -> UnitarySample:
    """Single hard-rod member diag(e^{i phi}) z."""
    if n0 < 2:
        raise ValidationError("c matrix needs n0 >= 2")
    return _phased(z_matrix(n0), seed, "c")


def big_c_matrix(n0: int, seed) -> UnitarySample:
    """Block matrix diag(e^{i phi}) [[0, z], [z^T, 0]] of dimension 2 n0,
    with the signed kernel z_jk = (-1)^{j+k} / (n0 sin(pi (j - k - 1/2)/n0))."""
    if n0 < 2:
        raise ValidationError("C matrix needs n0 >= 2")
    j = np.arange(n0)
    z = (-1.0) ** (j[:, None] + j[None, :]) / (
        n0 * np.sin(np.pi * (j[:, None] - j[None, :] - 0.5) / n0)
    )
    kernel = np.zeros((2 * n0, 2 * n0))
    kernel[:n0, n0:] = z
    kernel[n0:, :n0] = z.T
    return _phased(kernel, seed, "C")


def xi_matrix(n0: int, seed) -> UnitarySample:
    """Product of two independent c matrices:
    xi_nm = sum_k e^{i phi_n} z_nk e^{i phi'_k} z_mk."""
    if n0 < 2:
        raise ValidationError("xi matrix needs n0 >= 2")
    rng = np.random.default_rng(seed)
    phi = rng.uniform(0.0, 2 * np.pi, n0)
    phi2 = rng.uniform(0.0, 2 * np.pi, n0)
    z = z_matrix(n0)
    matrix = np.exp(1j * phi)[:, None] * (z * np.exp(1j * phi2)[None, :]) @ z.T
    return UnitarySample(matrix=matrix, phases=np.concatenate([phi, phi2]),
                         seed=seed, label="xi")


def eigenphases(sample: UnitarySample, modulus_tol: float = 1e-6) -> np.ndarray:
    """Sorted eigenphases in [0, 2pi); aborts if any eigenvalue leaves the circle."""
    lam = np.linalg.eigvals(sample.matrix)
    drift = np.abs(np.abs(lam) - 1.0).max()
    if drift > modulus_tol:
        raise NumericalAbort(
            f"eigenvalue modulus drift {drift:.2e} exceeds {modulus_tol:g} for {sample.label}"
        )
    return np.sort(np.angle(lam) % (2 * np.pi))


@dataclass(frozen=True)
class SpacingLaw:
    """Closed-form spacing-density family.

    family: one of 'semi-poisson', 'model-a', 'model-c', 'shifted-poisson',
    'poisson'; n is the matrix-dimension parameter of the finite-N families;
    order counts levels interior to the gap.
    """

    family: str
    n: int | None = None
    order: int = 0


def _binom(n, k):
    return np.exp(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def spacing_law_eval(law: SpacingLaw, s):
    """Evaluate the spacing density; zero outside the family's support."""
    s = np.asarray(s, dtype=float)
    n = law.order
    if n < 0:
        raise ValidationError("order must be >= 0")
    if law.family == "semi-poisson":
        out = 2 * (2 * s) ** (2 * n + 1) * np.exp(-2 * s) / np.exp(gammaln(2 * n + 2))
        return np.where(s >= 0, out, 0.0)
    if law.family == "poisson":
        out = s**n * np.exp(-s) / np.exp(gammaln(n + 1))
        return np.where(s >= 0, out, 0.0)
    if law.family == "shifted-poisson":
        t = 2 * s - n - 1
        with np.errstate(invalid="ignore"):
            out = 2 * np.where(t > 0, t, 0.0) ** n * np.exp(-np.where(t > 0, t, 0.0)) \
                / np.exp(gammaln(n + 1))
        return np.where(t > 0, out, 0.0)
    N = law.n
    if N is None:
        raise ValidationError(f"family {law.family!r} requires the dimension parameter n")
    if law.family == "model-a":
        if N < 2 * n + 3:
            raise ValidationError(f"model-a law needs N >= 2n+3, got N={N}, n={n}")
        inside = (s > 0) & (s < N / 2)
        base = np.where(inside, 1 - 2 * s / N, 1.0)
        out = ((2.0 / N) ** (2 * n + 2) * 2 * (n + 1) * _binom(N - 1, 2 * n + 2)
               * s ** (2 * n + 1) * base ** (N - 2 * n - 3))
        return np.where(inside, out, 0.0)
    if law.family == "model-c":
        if N < n + 2:
            raise ValidationError(f"model-c law needs N >= n+2, got N={N}, n={n}")
        lo, hi = (n + 1) / 2, (N + n + 1) / 2
        inside = (s > lo) & (s < hi)
        left = np.where(inside, hi - s, 1.0)
        right = np.where(inside, s - lo, 1.0)
        # accumulate in log space: left^(N-2-n) overflows for N of a few hundred
        log_out = ((N - 1) * np.log(2.0) + np.log(N - 1.0) - (N - 1) * np.log(N)
                   + gammaln(N - 1) - gammaln(n + 1) - gammaln(N - 1 - n)
                   + (N - 2 - n) * np.log(left) + n * np.log(right))
        return np.where(inside, np.exp(log_out), 0.0)
    raise ValidationError(f"unknown spacing-law family {law.family!r}")
