"""Wiener-Hopf factor K+ of the slab kernel tan(qb)/(qb).

K+ is evaluated as a truncated infinite product over channel momenta with an
optional Euler-Maclaurin tail correction, plus its closed-form high-energy
asymptotic.  Products are accumulated as sums of logarithms so that very long
truncations stay well conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PoleProximityError, ThresholdError, ValidationError

__all__ = [
    "FactorizationInput",
    "KPlusValue",
    "channel_momentum",
    "default_n_terms",
    "k_plus_product",
    "k_plus_corrected",
    "k_plus_asymptotic",
    "euler_product_constant",
]

#: relative tolerance for pole / threshold proximity checks
_PROXIMITY_RTOL = 1e-12


@dataclass(frozen=True)
class FactorizationInput:
    """Arguments of the factorization: wavenumber k, slab half-width b, argument alpha."""

    k: float
    b: float
    alpha: complex

    def __post_init__(self):
        if not self.k > 0:
            raise ValidationError(f"k must be positive, got {self.k}")
        if not self.b > 0:
            raise ValidationError(f"b must be positive, got {self.b}")


@dataclass(frozen=True)
class KPlusValue:
    """A K+ evaluation together with the truncation length that produced it."""

    value: complex
    n_terms: int
    corrected: bool


def channel_momentum(k: float, b: float, n: int):
    """Longitudinal momentum sqrt(k^2 - pi^2 n^2 / (4 b^2)) of transverse channel n.

    Real positive below threshold, purely imaginary with positive imaginary
    part above it, so that all singularities of K+ sit in the lower half-plane.
    Raises ThresholdError on exact (to rounding) threshold degeneracy.
    """
    if not (k > 0 and b > 0):
        raise ValidationError("k and b must be positive")
    n = np.asarray(n)
    if np.any(n < 1):
        raise ValidationError("channel index n must be >= 1")
    cutoff = np.pi * n / (2.0 * b)
    if np.any(np.abs(cutoff - k) <= _PROXIMITY_RTOL * k):
        raise ThresholdError(
            f"k={k} coincides with a channel threshold pi*n/(2b); perturb k"
        )
    p = np.sqrt(np.asarray(k**2 - cutoff**2, dtype=complex))
    # principal sqrt of a negative real can land on -i|p| only through rounding
    p = np.where(np.imag(p) < 0, -p, p)
    return complex(p) if p.ndim == 0 else p


def default_n_terms(k: float, b: float) -> int:
    """Default truncation: long enough that the tail correction dominates rounding."""
    return max(2000, int(np.ceil(10.0 * b * k / np.pi)))


def _product_momenta(k, b, n_terms):
    n = np.arange(1, n_terms + 1)
    p_even = np.sqrt((k**2 - np.pi**2 * n**2 / b**2).astype(complex))
    p_odd = np.sqrt((k**2 - np.pi**2 * (n - 0.5) ** 2 / b**2).astype(complex))
    p_even = np.where(p_even.imag < 0, -p_even, p_even)
    p_odd = np.where(p_odd.imag < 0, -p_odd, p_odd)
    return n, p_even, p_odd


def _log_product(inp: FactorizationInput, n_terms: int) -> complex:
    if n_terms < 1:
        raise ValidationError("n_terms must be >= 1")
    n, p_even, p_odd = _product_momenta(inp.k, inp.b, n_terms)
    denom = p_odd + inp.alpha
    scale = max(abs(inp.alpha), inp.k)
    bad = np.abs(denom) < _PROXIMITY_RTOL * scale
    if np.any(bad):
        j = int(np.argmax(bad))
        raise PoleProximityError(n[j], float(np.abs(denom[j])))
    logs = np.log1p(-0.5 / n) + np.log(p_even + inp.alpha) - np.log(denom)
    return complex(logs.sum())


def k_plus_product(inp: FactorizationInput, n_terms: int) -> KPlusValue:
    """Raw truncated product for K+(alpha); truncation error is O(1/n_terms)."""
    return KPlusValue(np.exp(_log_product(inp, n_terms)), n_terms, corrected=False)


def _tail_correction(inp: FactorizationInput, n_terms: int) -> complex:
    kappa = inp.b * inp.k / np.pi
    v = 1j * inp.b * inp.alpha / np.pi
    a2 = v / 2
    a3 = (2 * kappa**2 + 2 * v**2 + v) / 4
    a4 = (6 * kappa**2 * v + 4 * v**3 + 3 * kappa**2 + 3 * v**2 + v) / 8
    N = n_terms
    return a2 / N + (a3 - a2) / (2 * N**2) + (2 * a4 - 3 * a3 + a2) / (6 * N**3)


def k_plus_corrected(inp: FactorizationInput, n_terms: int | None = None) -> KPlusValue:
    """Truncated product times exp of the Euler-Maclaurin tail correction.

    Requires n_terms > b*k/pi so every retained tail momentum is on the
    evanescent branch; the residual then falls off like n_terms**-4.
    """
    if n_terms is None:
        n_terms = default_n_terms(inp.k, inp.b)
    if not n_terms > inp.b * inp.k / np.pi:
        raise ValidationError(
            f"n_terms={n_terms} must exceed b*k/pi={inp.b * inp.k / np.pi:.1f}"
        )
    log_val = _log_product(inp, n_terms) + _tail_correction(inp, n_terms)
    return KPlusValue(np.exp(log_val), n_terms, corrected=True)


def k_plus_asymptotic(inp: FactorizationInput) -> complex:
    """High-energy closed form exp(i pi/4) / sqrt(b (k + alpha))."""
    return np.exp(1j * np.pi / 4) / np.sqrt(complex(inp.b * (inp.k + inp.alpha)))


def k_plus_values(k: float, b: float, alphas, n_terms: int | None = None):
    """Vectorized corrected K+ over an array of alpha values (shared k, b)."""
    if n_terms is None:
        n_terms = default_n_terms(k, b)
    n, p_even, p_odd = _product_momenta(k, b, n_terms)
    al = np.atleast_1d(np.asarray(alphas, dtype=complex))[:, None]
    logs = (
        np.log1p(-0.5 / n)
        + np.log(p_even + al)
        - np.log(p_odd + al)
    ).sum(axis=1)
    tail = np.array(
        [_tail_correction(FactorizationInput(k, b, a), n_terms) for a in np.ravel(alphas)]
    )
    return np.exp(logs + tail)


def euler_product_constant() -> float:
    """Value of prod_n (1 - 1/(2n)) e^{1/(2n)}, i.e. e^{gamma/2}/sqrt(pi)."""
    return float(np.exp(np.euler_gamma / 2) / np.sqrt(np.pi))
