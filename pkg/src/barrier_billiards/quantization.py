"""Eigen-wavenumbers of the barrier billiard from the secular condition
det(1 + B(k)) = 0.

The propagating transfer matrix is dressed with a finite number of evanescent
channels (complex couplings, decaying phase factors), and roots are located by
tracking the eigenphases of B continuously in k: a level sits wherever an
eigenvalue crosses -1.  The determinant itself is never formed -- it swings
over many orders of magnitude while unit-circle crossings stay conditioned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import NumericalAbort, ValidationError
from .transfer_operator import Geometry, build_mode_set
from .trace_formula import weyl_density

__all__ = [
    "SecularRoot",
    "SecularScan",
    "secular_matrix",
    "secular_scan",
    "spectrum_to_counting",
    "rectangle_levels",
]

#: accept a root where some eigenvalue satisfies |lambda + 1| below this;
#: genuine roots reach ~1e-13 except where evanescent truncation leaves an
#: O(1e-8) unitarity deficit on the crossing branch, while off-circle axis
#: crossings (not roots) stay above ~1e-4
_ROOT_PHASE_TOL = 1e-6
#: roots closer than this (relative to k) are merged into one multiplet
_MERGE_RTOL = 1e-9
_CLUSTER_RTOL = 1e-7
_STEP_WINDING_CAP = 1.5
#: |lambda + 1| at a threshold-edge probe below which a branch counts as a
#: genuine level pinned to the channel opening (the unphysical threshold
#: branch only vanishes like sqrt(|k - k_t|) and stays well above this)
_THRESHOLD_ZERO_TOL = 1e-4


@dataclass(frozen=True)
class SecularRoot:
    """A located level: wavenumber, multiplicity, eigenphase residual, flag.

    flag is "" normally and "near-threshold" for roots within 10 dk of a
    channel opening, where the truncated basis is least trustworthy.
    """

    k: float
    multiplicity: int
    residual: float
    flag: str = ""


@dataclass
class SecularScan:
    """Scan configuration plus the roots it produced."""

    geometry: Geometry
    k_min: float
    k_max: float
    dk: float
    n_evanescent: int
    roots: list = field(default_factory=list)

    @property
    def k_roots(self) -> np.ndarray:
        return np.array([r.k for r in self.roots for _ in range(r.multiplicity)])


def secular_matrix(k: float, geometry: Geometry, n_evanescent: int = 10,
                   swap_phase_roles: bool = False) -> np.ndarray:
    """Dressed transfer matrix B(k) = diag(e^{i phi}) L L^T / (x_n + x_m).

    Couplings are the full complex channel amplitudes; evanescent channels get
    imaginary momenta so their phase factors e^{2 i h p} decay.  With
    swap_phase_roles the h1 / h2 runs are attached to the opposite parities,
    which realises the mirror geometry (h2, h1).
    """
    modes = build_mode_set(k, geometry, n_evanescent)
    n = np.arange(1, modes.dim + 1)
    S = np.outer(modes.l, modes.l) / (modes.x[:, None] + modes.x[None, :])
    h_odd, h_even = geometry.h1, geometry.h2
    if swap_phase_roles:
        h_odd, h_even = h_even, h_odd
    phi = np.where(n % 2 == 1, 2 * h_odd * modes.p, 2 * h_even * modes.p)
    return np.exp(1j * phi)[:, None] * S


def _thresholds(geometry: Geometry, k_min: float, k_max: float) -> np.ndarray:
    n_lo = int(np.floor(2 * geometry.b * k_min / np.pi)) + 1
    n_hi = int(np.floor(2 * geometry.b * k_max / np.pi))
    return np.pi * np.arange(n_lo, n_hi + 1) / (2 * geometry.b)


#: eigenvalues with modulus below this are evanescent-dominated; their phases
#: are numerical noise and they cannot reach -1, so they are kept for pairing
#: but excluded from crossing detection
_MODULUS_FLOOR = 0.5


def _match(lam_prev: np.ndarray, lam_next: np.ndarray):
    """Pair eigenvalue lists by complex-plane proximity.

    Returns (perm, movement) where movement is the largest displacement among
    pairs that could matter for a crossing of -1 (modulus above the floor on
    either side); the cloud of near-zero eigenvalues shuffles freely.
    """
    dist = np.abs(lam_next[None, :] - lam_prev[:, None])
    rows, cols = linear_sum_assignment(dist)
    live = (np.abs(lam_prev[rows]) > _MODULUS_FLOOR) | \
           (np.abs(lam_next[cols]) > _MODULUS_FLOOR)
    movement = float(dist[rows, cols][live].max()) if live.any() else 0.0
    return cols, movement


def _wrap(delta: np.ndarray) -> np.ndarray:
    return (delta + np.pi) % (2 * np.pi) - np.pi


def _refine_root(eval_lam, k1, k2, lam1, j, c1, c2) -> tuple[float, float]:
    """Polish one crossing of arg(-lambda) through zero on [k1, k2].

    Bisection where the branch value at each midpoint is obtained by matching
    the full eigenvalue vector to the one at the lower bracket end (lam1,
    whose branch j has accumulated phase c1).  Global matching keeps the
    branch identity even when several branches sit close to -1 at once,
    where anchoring on the phase alone collapses nearby zeros onto one.

    Returns (k_root, residual, multiplicity, end phase) with residual =
    min |lambda + 1| at the root and multiplicity the number of eigenvalues
    within tolerance of -1 there.  A converged end phase with a large
    residual marks an off-circle eigenvalue crossing the negative real axis,
    which is not a root.  Grazing touches return (None, distance, 0, nan).
    """
    g1, g2 = c1, c2
    if np.sign(g1) == np.sign(g2):
        # grazing contact: the branch touched zero without crossing
        return None, float(min(abs(g1), abs(g2))), 0, np.nan
    xtol = 1e-13 * max(k2, 1.0)
    km, lam_m, gm = 0.5 * (k1 + k2), None, np.nan
    while k2 - k1 > xtol:
        km = 0.5 * (k1 + k2)
        lam_m = eval_lam(km)
        perm, _ = _match(lam1, lam_m)
        matched = lam_m[perm]
        gm = g1 + _wrap(np.angle(-matched[j]) - np.angle(-lam1[j]))
        if gm == 0.0:
            break
        if np.sign(gm) == np.sign(g1):
            k1, g1, lam1 = km, gm, matched
        else:
            k2, g2 = km, gm
    if lam_m is None:
        lam_m = eval_lam(km)
    dist = np.abs(lam_m + 1.0)
    resid = float(dist.min())
    mult = int(np.sum(dist <= max(10 * resid, _ROOT_PHASE_TOL)))
    return float(km), resid, mult, float(abs(gm))


def _scan_interval(geometry, k_lo, k_hi, dk, n_evanescent, swap, min_step):
    """Track eigenphases over [k_lo, k_hi] (threshold-free) and collect roots."""

    def lam_at(k):
        return np.linalg.eigvals(secular_matrix(k, geometry, n_evanescent, swap))

    def step_at(k):
        # the level density grows linearly with k, so the tracking step must
        # shrink accordingly or whole branch windings alias between samples
        return min(dk, _STEP_WINDING_CAP / max(k, 1.0))

    roots = []
    k_prev = k_lo
    lam_prev = lam_at(k_lo)
    c_prev = np.angle(-lam_prev)
    stack = [min(k_lo + step_at(k_lo), k_hi)]
    while stack:
        k_next = stack.pop()
        lam_raw = lam_at(k_next)
        perm, movement = _match(lam_prev, lam_raw)
        if movement > 1.0 and (k_next - k_prev) > min_step:
            stack.append(k_next)
            stack.append(0.5 * (k_prev + k_next))
            continue
        lam_next = lam_raw[perm]
        delta = _wrap(np.angle(-lam_next) - c_prev)
        live = (np.abs(lam_prev) > _MODULUS_FLOOR) & \
               (np.abs(lam_next) > _MODULUS_FLOOR)
        crossed = np.where(live & (c_prev != 0.0)
                           & (np.sign(c_prev) != np.sign(c_prev + delta)))[0]
        step_roots = []
        failed = False
        tiny = (k_next - k_prev) <= 1e-10 * max(k_next, 1.0)
        for j in crossed:
            k_root, resid, mult, g_end = _refine_root(
                lam_at, k_prev, k_next, lam_prev, j,
                c_prev[j], c_prev[j] + delta[j])
            if k_root is None:
                continue
            if resid > _ROOT_PHASE_TOL:
                if g_end < 1e-6:
                    # the branch phase did cross zero but the eigenvalue sits
                    # off the unit circle: an axis crossing, not a level
                    continue
                if tiny and resid > 1e-3:
                    # no eigenvalue anywhere near -1 in this micro-interval:
                    # phase jitter at an off-circle eigenvalue collision
                    continue
                if tiny:
                    raise NumericalAbort(
                        f"eigenphase residual {resid:.2e} at k={k_root:.8f} "
                        f"did not reach {_ROOT_PHASE_TOL:g}"
                    )
                failed = True
                break
            step_roots.append((k_root, resid, mult))
        if failed:
            # either two near-degenerate branches cross inside this step or a
            # spurious sign change from branch mismatch near a threshold; in
            # both cases halving the step disentangles the branches
            stack.append(k_next)
            stack.append(0.5 * (k_prev + k_next))
            continue
        roots.extend(step_roots)
        # re-wrap so the zero-crossing sign test stays valid as branches wind
        k_prev, lam_prev = k_next, lam_next
        c_prev = _wrap(c_prev + delta)
        # only schedule a fresh step when no pending endpoint remains from a
        # subdivision; otherwise the popped stale endpoint would rescan
        # ground already covered
        if not stack and k_next < k_hi:
            stack.append(min(k_next + step_at(k_next), k_hi))
    return roots


def secular_scan(geometry: Geometry, k_min: float, k_max: float, dk: float,
                 n_evanescent: int = 10,
                 swap_phase_roles: bool = False) -> SecularScan:
    """Locate all eigen-wavenumbers in [k_min, k_max].

    The scan is split at channel thresholds pi n/(2b), where the basis
    dimension jumps; roots within 10 dk of a threshold are flagged.  Within
    each piece the step is capped at 1.5/k to follow the growing level
    density and halved adaptively whenever eigenphases move too far, so
    crossings of -1 cannot be stepped over.
    """
    if not (0 < k_min < k_max):
        raise ValidationError("need 0 < k_min < k_max")
    if not dk > 0:
        raise ValidationError("dk must be positive")
    if k_min <= np.pi / (2 * geometry.b):
        raise ValidationError("k_min must exceed the first channel threshold pi/(2b)")
    margin = 1e-9 * k_max
    cuts = _thresholds(geometry, k_min, k_max)
    edges = np.concatenate([[k_min], cuts, [k_max]])
    raw = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        lo, hi = lo + margin, hi - margin
        if hi - lo < 2 * margin:
            continue
        raw.extend(_scan_interval(geometry, lo, hi, min(dk, (hi - lo) / 2),
                                  n_evanescent, swap_phase_roles,
                                  min_step=dk / 256))
    # levels sitting exactly at a channel threshold cannot be bracketed by the
    # split scan; probe both sides of each cut for eigenvalue branches that
    # reach -1 there.  For each branch close to -1 the zero position is
    # extrapolated linearly from the offsets delta and 2 delta: a level pinned
    # at k_t lands on k_t exactly, a regular level nearby lands on itself, and
    # the unphysical sqrt(|k - k_t|) threshold branch lands ~1.4 delta off.
    def _count_pinned(kt, kk_near, kk_far):
        lam_n = np.linalg.eigvals(
            secular_matrix(kk_near, geometry, n_evanescent, swap_phase_roles))
        d_n = np.sort(np.abs(lam_n + 1.0))
        d_n = d_n[d_n < _THRESHOLD_ZERO_TOL]
        if len(d_n) == 0:
            return 0, 0.0
        lam_f = np.linalg.eigvals(
            secular_matrix(kk_far, geometry, n_evanescent, swap_phase_roles))
        d_f = np.sort(np.abs(lam_f + 1.0))[:len(d_n)]
        slope = (d_f - d_n) / (kk_far - kk_near)
        with np.errstate(divide="ignore", invalid="ignore"):
            k_zero = kk_near - d_n / slope
        pinned = np.isfinite(k_zero) & (np.abs(k_zero - kt) <= 0.5 * margin)
        return int(pinned.sum()), float(d_n[pinned].max()) if pinned.any() else 0.0

    for kt in cuts:
        mult, resid = 0, 0.0
        for sign in (-1.0, 1.0):
            kk_near, kk_far = kt + sign * margin, kt + 2 * sign * margin
            if not (k_min < kk_near < k_max and k_min < kk_far < k_max):
                continue
            m, r = _count_pinned(kt, kk_near, kk_far)
            if m > mult:
                mult, resid = m, r
        if mult:
            raw.append((float(kt), resid, mult))
    raw.sort()
    scan = SecularScan(geometry=geometry, k_min=k_min, k_max=k_max, dk=dk,
                       n_evanescent=n_evanescent)
    # first merge tier: identical zeros reached from several branch crossings
    # (they agree to the bisection tolerance); the eigenvalue count at the
    # root is the same for each, so take the maximum
    merged = []
    i = 0
    while i < len(raw):
        j = i
        while j + 1 < len(raw) and raw[j + 1][0] - raw[i][0] <= _MERGE_RTOL * max(raw[i][0], 1.0):
            j += 1
        merged.append((float(np.mean([r[0] for r in raw[i:j + 1]])),
                       float(max(r[1] for r in raw[i:j + 1])),
                       max(r[2] for r in raw[i:j + 1])))
        i = j + 1
    # second tier: near-degenerate clusters.  Zeros closer than the eigenvalue
    # counting window see each other, so each member already reports the whole
    # cluster; the cluster size is the larger of the individual counts and the
    # number of distinct zeros located
    i = 0
    while i < len(merged):
        j = i
        while j + 1 < len(merged) and merged[j + 1][0] - merged[i][0] <= _CLUSTER_RTOL * max(merged[i][0], 1.0):
            j += 1
        group = merged[i:j + 1]
        k_root = float(np.mean([g[0] for g in group]))
        resid = float(max(g[1] for g in group))
        mult = max(max(g[2] for g in group), len(group))
        near = bool(len(cuts)) and np.min(np.abs(cuts - k_root)) < 10 * dk
        scan.roots.append(SecularRoot(k=k_root, multiplicity=mult,
                                      residual=resid,
                                      flag="near-threshold" if near else ""))
        i = j + 1
    return scan


def spectrum_to_counting(roots, geometry: Geometry | None = None):
    """Counting staircase N(k) at the root positions.

    Returns (k, N, N_fluct) with the smooth Weyl term (ab/4pi) k^2 subtracted
    when a geometry is supplied (N_fluct = None otherwise).
    """
    ks = []
    for r in roots:
        if isinstance(r, SecularRoot):
            ks.extend([r.k] * r.multiplicity)
        else:
            ks.append(float(r))
    k = np.sort(np.asarray(ks))
    n = np.arange(1, len(k) + 1, dtype=float)
    fluct = None
    if geometry is not None:
        fluct = n - weyl_density(geometry) * k**2
    return k, n, fluct


def rectangle_levels(a: float, b: float, count: int) -> np.ndarray:
    """First eigen-wavenumbers sqrt(pi^2 (m^2/a^2 + n^2/b^2)) of the Dirichlet
    rectangle, sorted, duplicates kept."""
    cap = int(np.ceil(np.sqrt(4 * count) + 4))
    m, n = np.meshgrid(np.arange(1, cap + 1), np.arange(1, cap + 1))
    k = np.pi * np.sqrt(m**2 / a**2 + n**2 / b**2)
    return np.sort(k.ravel())[:count]
