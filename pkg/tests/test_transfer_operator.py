import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from barrier_billiards.errors import (
    IntertwiningError,
    OpticalBoundaryError,
    ThresholdError,
    ValidationError,
)
from barrier_billiards.transfer_operator import (
    Geometry,
    b_matrix,
    b_matrix_random,
    build_mode_set,
    propagating_count,
    reflected_image_sum,
    s_matrix_asymptotic,
    s_matrix_exact,
    s_paraxial,
    sommerfeld_diffraction,
    transmitted_channel_expansion,
    transmitted_image_sum,
    unitarity_defect,
)


def test_geometry_validation():
    g = Geometry.from_split(1.0, 1.0, 0.3)
    assert g.h2 == pytest.approx(0.7)
    with pytest.raises(ValidationError):
        Geometry(1.0, 1.0, 0.3, 0.5)
    with pytest.raises(ValidationError):
        Geometry.from_split(1.0, 1.0, 1.0)  # h2 = 0


def test_propagating_count():
    # thresholds at k = pi n / (2b)
    assert propagating_count(np.pi / 2 * 3.5, 1.0) == 3
    assert propagating_count(1.0, 1.0) == 0
    assert propagating_count(10.0, 2.0) == int(np.floor(40 / np.pi))


def test_build_mode_set_structure():
    g = Geometry.from_split(1.0, 1.0, 0.3)
    modes = build_mode_set(30.0, g, n_evanescent=5)
    assert modes.n_prop == propagating_count(30.0, 1.0)
    assert modes.dim == modes.n_prop + 5
    x = modes.x[: modes.n_prop]
    assert np.all(np.sign(np.real(x)) == (-1.0) ** np.arange(modes.n_prop))
    assert np.all(np.diff(np.abs(x)) < 0)
    # evanescent tail: imaginary momenta
    assert np.all(np.abs(np.imag(modes.p[modes.n_prop:])) > 0)
    with pytest.raises(ThresholdError):
        build_mode_set(np.pi * 4 / 2, g, n_evanescent=1)
    with pytest.raises(ValidationError):
        build_mode_set(1.0, g)


def test_couplings_match_finite_product_moduli():
    # |L|^2 from the corrected factorization against the independent exact
    # finite product over signed coordinates
    g = Geometry.from_split(1.0, 1.0, 0.3)
    modes = build_mode_set(30.0 * np.pi, g)
    rel = np.abs(np.abs(modes.l[: modes.n_prop]) ** 2 - modes.l_mod2) / modes.l_mod2
    assert rel.max() < 1e-7


def test_s_matrix_exact_is_symmetric_involution():
    g = Geometry.from_split(1.0, 1.0, 0.3)
    s = s_matrix_exact(build_mode_set(30.0, g))
    assert np.abs(s - s.T).max() < 1e-12
    assert np.abs(s @ s - np.eye(len(s))).max() < 1e-12


def test_b_matrix_unitary_with_correct_phases():
    g = Geometry.from_split(1.0, 1.0, 0.3)
    modes = build_mode_set(30.0, g)
    sample = b_matrix(modes, g)
    assert unitarity_defect(sample.matrix) < 1e-12
    p = np.real(modes.p[: modes.n_prop])
    expect = np.where(np.arange(1, modes.n_prop + 1) % 2 == 1,
                      2 * g.h1 * p, 2 * g.h2 * p) % (2 * np.pi)
    assert np.abs(sample.phases - expect).max() < 1e-12


def test_b_matrix_random_deterministic_in_seed():
    g = Geometry.from_split(1.0, 1.0, 0.5)
    x = np.real(build_mode_set(40.0, g).x)
    dim = len(x)
    a = b_matrix_random(dim, x, 3).matrix
    b = b_matrix_random(dim, x, 3).matrix
    c = b_matrix_random(dim, x, 4).matrix
    assert np.array_equal(a, b)
    assert np.abs(a - c).max() > 1e-3
    assert unitarity_defect(a) < 1e-12
    with pytest.raises(ValidationError):
        b_matrix_random(dim + 1, x, 0)
    with pytest.raises(IntertwiningError):
        b_matrix_random(dim, np.abs(x), 0)


def test_paraxial_block_normalizes_away_from_edges():
    # the truncated kernel is only unitary under bi-infinite summation, so the
    # central-row norm approaches 1 while edge rows keep an O(1) defect
    def central_row_norm(half_dim):
        s = s_paraxial(half_dim)
        row = s[half_dim // 2]
        return np.sum(row**2)

    err10 = abs(central_row_norm(10) - 1.0)
    err80 = abs(central_row_norm(80) - 1.0)
    assert err80 < err10 / 4
    # corner rows never normalize: half the pole sum is always missing
    s = s_paraxial(80)
    assert abs(np.sum(s[0] ** 2) - 1.0) > 0.1
    with pytest.raises(ValidationError):
        s_paraxial(0)


def test_exact_matrix_approaches_paraxial_kernel():
    # odd-even block of S at large k vs the pole term 1/(pi (m - n + 1/2))
    g = Geometry.from_split(1.0, 1.0, 0.3)
    k = 400.5 * np.pi / 2
    modes = build_mode_set(float(k), g)
    s = s_matrix_exact(modes)
    n, m = 100, 100  # physical channels 2n-1 = 199 and 2m = 200, near-paraxial
    pole = (-1.0) ** (n + m) / (np.pi * (m - n + 0.5))
    assert abs(abs(s[2 * n - 2, 2 * m - 1]) - abs(pole)) < 0.05 * abs(pole)


def test_asymptotic_elements_against_exact():
    # the dominant odd-even elements converge fast; the subleading same-parity
    # elements carry k^{-1/2} corrections, so check their trend instead
    g = Geometry.from_split(1.0, 1.0, 0.3)

    def rel_err(kf, n, m, pair, idx):
        k = kf * np.pi
        s = s_matrix_exact(build_mode_set(k, g))
        return abs(abs(s_matrix_asymptotic(k, 1.0, n, m, pair)) - abs(s[idx])) / abs(s[idx])

    assert rel_err(100, 25, 25, "odd-even", (48, 49)) < 2e-4
    for pair, idx in (("odd-odd", (38, 58)), ("even-even", (39, 59))):
        e100 = rel_err(100, 20, 30, pair, idx)
        e400 = rel_err(400, 20, 30, pair, idx)
        assert e100 < 0.12
        assert e400 < 0.65 * e100, (pair, e100, e400)


def test_asymptotic_resonant_denominator_raises():
    with pytest.raises(ValidationError):
        # p_{2n-1} = p_{2m} is impossible for integer channels, but a fake
        # near-coincidence is caught through the guard
        s_matrix_asymptotic(100.0, 1.0, 3, 3, "unknown-pair")


def test_sommerfeld_diffraction_values():
    # head-on incidence scattered straight back: both cosines give 1/cos(pi/4)
    val = sommerfeld_diffraction(np.pi / 2, np.pi)
    assert val == pytest.approx(2 * np.sqrt(2))
    # reciprocity D(ti, t) = D(t, ti)
    assert sommerfeld_diffraction(0.7, 2.1) == pytest.approx(
        sommerfeld_diffraction(2.1, 0.7))
    with pytest.raises(OpticalBoundaryError):
        sommerfeld_diffraction(0.7, np.pi - 0.7)


def test_image_sum_vanishes_on_channel_walls():
    # the half-plane image families cancel pairwise on y = 0 and y = b
    k = 20.3 * np.pi
    # y = 0: the two image families coincide and cancel exactly
    for fn in (transmitted_image_sum, reflected_image_sum):
        val, _ = fn(k, 1.0, 2, 1.5, 0.0, r_max=400)
        assert val == 0.0
    # y = b: cancellation telescopes, leaving only far-edge terms
    for fn in (transmitted_image_sum, reflected_image_sum):
        val, _ = fn(k, 1.0, 2, 1.5, 1.0, r_max=4000)
        assert abs(val) < 1e-6
    with pytest.raises(ValidationError):
        transmitted_image_sum(k, 1.0, 2, -0.5, 0.4)


@pytest.mark.xfail(
    strict=True,
    reason="the cylindrical-wave image construction is only a formal asymptotic "
    "identification: near-threshold channels sit in the coalescing-saddle "
    "regime and the closest images inside the Fresnel zone of the optical "
    "boundaries, so the partial sums never approach the channel expansion "
    "at finite k (observed relative deviation O(1) for k up to 1200 pi)",
)
def test_image_sum_matches_channel_expansion():
    k = 60.3 * np.pi
    val, resid = transmitted_image_sum(k, 1.0, 2, 1.5, 0.4, r_max=20000)
    ref = transmitted_channel_expansion(k, 1.0, 2, 1.5, 0.4)
    assert abs(val - ref) <= 0.05 * abs(ref)


def test_unitarity_defect_zero_for_identity():
    assert unitarity_defect(np.eye(5)) == 0.0


@settings(max_examples=15, deadline=None)
@given(
    k=st.floats(8.0, 60.0),
    b=st.floats(0.5, 2.0),
    frac=st.floats(0.05, 0.95),
)
def test_involution_property_random_geometries(k, b, frac):
    if propagating_count(k, b) < 2:
        return
    n = np.arange(1, propagating_count(k, b) + 1)
    if np.any(np.abs(np.pi * n / (2 * b) - k) < 1e-6 * k):
        return  # skip near-threshold draws
    g = Geometry.from_split(1.0, b, frac)
    modes = build_mode_set(k, g)
    s = s_matrix_exact(modes)
    assert np.abs(s @ s - np.eye(len(s))).max() < 1e-9
    assert unitarity_defect(b_matrix(modes, g).matrix) < 1e-9
