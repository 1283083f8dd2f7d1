import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from barrier_billiards.errors import PoleProximityError, ThresholdError, ValidationError
from barrier_billiards.wiener_hopf import (
    FactorizationInput,
    channel_momentum,
    default_n_terms,
    euler_product_constant,
    k_plus_asymptotic,
    k_plus_corrected,
    k_plus_product,
    k_plus_values,
)

# 50-digit mpmath reference values for sqrt(k^2 - pi^2 n^2/(4 b^2)) at
# k=200, b=1 (propagating n=100, evanescent n=150)
P_PROP_REF = 123.79817848933240041
P_EVAN_REF = 124.56534331878848168

# corrected product at k=200, b=1, alpha=60 with n_terms=10^6 (frozen run)
KPLUS_REF = 0.037162162649176426 + 0.046709800984558535j


def test_channel_momentum_against_high_precision():
    p = channel_momentum(200.0, 1.0, 100)
    assert abs(p - P_PROP_REF) < 1e-11
    q = channel_momentum(200.0, 1.0, 150)
    assert abs(q.real) == 0.0
    assert abs(q.imag - P_EVAN_REF) < 1e-11


def test_channel_momentum_branch_is_upper_half_plane():
    n = np.arange(1, 400)
    p = channel_momentum(200.0, 1.0, n)
    assert np.all(p.imag >= 0)


def test_threshold_coincidence_raises():
    b = 1.0
    k = np.pi * 7 / (2 * b)
    with pytest.raises(ThresholdError):
        channel_momentum(k, b, 7)


def test_input_validation():
    with pytest.raises(ValidationError):
        FactorizationInput(-1.0, 1.0, 0.5)
    with pytest.raises(ValidationError):
        FactorizationInput(1.0, 0.0, 0.5)
    with pytest.raises(ValidationError):
        channel_momentum(10.0, 1.0, 0)


def test_euler_product_constant():
    # closed form e^{gamma/2}/sqrt(pi); mpmath partial product at 2*10^5
    # terms gives 0.7529499766, converging to 0.7529495060464206
    assert abs(euler_product_constant() - 0.7529495060464206) < 1e-14
    n = np.arange(1, 50001)
    partial = np.exp((np.log1p(-0.5 / n) + 0.5 / n).sum())
    assert abs(partial - euler_product_constant()) < 1e-4


def test_corrected_regression_value():
    inp = FactorizationInput(200.0, 1.0, 60.0)
    val = k_plus_corrected(inp, 100000).value
    assert abs(val - KPLUS_REF) < 1e-12


def test_factorization_identity_complex_k():
    # tan(qb)/(qb) = K+(alpha) K+(-alpha) with q = sqrt(k^2 - alpha^2);
    # holds off the real axis where both factors are analytic
    k = 50.0 + 0.7j
    b = 1.0
    alpha = 13.0 + 0.2j

    def kp(al):
        n = np.arange(1, 100001)
        p_even = np.sqrt((k**2 - np.pi**2 * n**2 / b**2).astype(complex))
        p_even = np.where(p_even.imag < 0, -p_even, p_even)
        p_odd = np.sqrt((k**2 - np.pi**2 * (n - 0.5) ** 2 / b**2).astype(complex))
        p_odd = np.where(p_odd.imag < 0, -p_odd, p_odd)
        kappa = b * k / np.pi
        v = 1j * b * al / np.pi
        a2 = v / 2
        a3 = (2 * kappa**2 + 2 * v**2 + v) / 4
        a4 = (6 * kappa**2 * v + 4 * v**3 + 3 * kappa**2 + 3 * v**2 + v) / 8
        nn = len(n)
        tail = a2 / nn + (a3 - a2) / (2 * nn**2) + (2 * a4 - 3 * a3 + a2) / (6 * nn**3)
        return np.exp((np.log1p(-0.5 / n) + np.log(p_even + al) - np.log(p_odd + al)).sum() + tail)

    q = np.sqrt(k**2 - alpha**2)
    lhs = np.tan(q * b) / (q * b)
    rhs = kp(alpha) * kp(-alpha)
    assert abs(lhs - rhs) / abs(lhs) < 1e-10


def test_raw_product_truncation_error_is_first_order():
    inp = FactorizationInput(20.0, 1.0, 7.0)
    ref = k_plus_corrected(inp, 200000).value
    err = [abs(k_plus_product(inp, n).value - ref) for n in (1000, 2000, 4000)]
    ratios = [err[i] / err[i + 1] for i in range(2)]
    assert all(1.8 < r < 2.2 for r in ratios)


def test_corrected_convergence_slope():
    inp = FactorizationInput(200.0, 1.0, 100.56)
    ref = k_plus_corrected(inp, 100000).value
    ns = np.array([200, 400, 800, 1600, 3200])
    errs = np.array([abs(k_plus_corrected(inp, int(n)).value - ref) for n in ns])
    slope = np.polyfit(np.log(ns), np.log(errs), 1)[0]
    assert slope <= -3.5


def test_corrected_needs_enough_terms():
    inp = FactorizationInput(200.0, 1.0, 60.0)
    with pytest.raises(ValidationError):
        k_plus_corrected(inp, 50)  # b*k/pi ~ 63.7


def test_pole_proximity_detected():
    k, b = 20.0, 1.0
    pole = -complex(np.sqrt(k**2 - np.pi**2 * 0.25 / b**2))
    with pytest.raises(PoleProximityError):
        k_plus_product(FactorizationInput(k, b, pole), 100)


def test_vectorized_values_match_scalar_path():
    k, b = 30.0, 1.0
    alphas = np.array([4.0, 9.5, 15.0 + 2.0j])
    vec = k_plus_values(k, b, alphas, n_terms=3000)
    for a, v in zip(alphas, vec):
        ref = k_plus_corrected(FactorizationInput(k, b, a), 3000).value
        assert abs(v - ref) < 1e-13


def test_default_n_terms_scales_with_k():
    assert default_n_terms(10.0, 1.0) == 2000
    assert default_n_terms(5000.0, 1.0) >= 10 * 5000 / np.pi


def test_asymptotic_phase_and_magnitude():
    inp = FactorizationInput(100.0, 2.0, 30.0)
    val = k_plus_asymptotic(inp)
    assert abs(abs(val) - 1 / np.sqrt(2.0 * 130.0)) < 1e-14
    assert abs(np.angle(val) - np.pi / 4) < 1e-14


@settings(max_examples=25, deadline=None)
@given(
    k=st.floats(5.0, 50.0),
    b=st.floats(0.5, 2.0),
    frac=st.floats(0.1, 0.9),
)
def test_corrected_value_stable_in_truncation(k, b, frac):
    # doubling the truncation must not move the corrected value appreciably
    alpha = frac * k
    inp = FactorizationInput(k, b, alpha)
    v1 = k_plus_corrected(inp, 2000).value
    v2 = k_plus_corrected(inp, 4000).value
    assert abs(v1 - v2) / abs(v2) < 1e-8
