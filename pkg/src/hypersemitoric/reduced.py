"""Reduced Hamiltonian on the spheres ``M_j = J^{-1}(j) / S^1``.

On a slice ``0 < j < 3`` the reduced sphere carries coordinates ``(h, phi)``:
``h`` runs over the slice ``[h_min(j), h_max(j)]`` of the octagon and ``phi``
is the angle of the monomial ``conj(z2 z3 z4) z6 z7 z8``.  In these
coordinates

    Hbar_t = (1 - 2 t1) h + t1 c(j, h) cos(phi) + t2 (8/25) l4^2 l5^2
             + t3 (8/25) l4^2 l7^2 + t4 (4/25) l5^2 l7^2,
    c(j, h) = (4/25) sqrt(l2 l3 l4 l6 l7 l8).

Two other descriptions of the same function are used throughout.

* Meridian: with ``h = h_min + D (1 - cos s) / 2`` (``D`` the slice width)
  and ``phi = 0`` for ``sin s > 0``, ``phi = pi`` otherwise, the great circle
  ``phi in {0, pi}`` is parametrised by ``s in [0, 2 pi)`` and
  ``f(s) = a(cos s) + B sin(s) q(cos s)`` is smooth and periodic.  Since
  ``d/dphi Hbar = -t1 c sin(phi)``, every critical point of ``Hbar`` on ``M_j``
  lies on this circle (for ``t1 != 0``).
* Disc: writing ``X = sin(u) cos(phi)``, ``Z = cos(u)`` the sphere function is
  ``a(Z) + B X q(Z)``, linear in ``X``.  The level set ``Hbar = c`` is the
  part of the graph ``X = (c - a(Z)) / (B q(Z))`` inside the unit disc, so its
  connected components are the Z-intervals where the polynomial
  ``(c - a)^2 - B^2 R (1 - Z^2)`` is non-positive.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from .ambient import OCTAGON, PerturbationParams, TLike, _t
from .errors import DomainError, PoleError

MONOMIAL_FACETS = (1, 2, 3, 5, 6, 7)   # 0-based facets of conj(z2 z3 z4) z6 z7 z8
TWO_PI = 2.0 * math.pi


class CriticalType(str, enum.Enum):
    ELLIPTIC_REGULAR = "elliptic-regular"
    HYPERBOLIC_REGULAR = "hyperbolic-regular"
    DEGENERATE = "degenerate"
    ELLIPTIC_ELLIPTIC = "elliptic-elliptic-like"
    FOCUS_FOCUS = "focus-focus-like"


class PoleType(str, enum.Enum):
    ELLIPTIC_ELLIPTIC = "elliptic-elliptic-like"
    FOCUS_FOCUS = "focus-focus-like"
    RANK_ONE = "rank-one-pole"
    REGULAR = "regular"
    DEGENERATE = "degenerate"


def _facet_values(j, h):
    x = np.stack(np.broadcast_arrays(np.asarray(j, float), np.asarray(h, float)), axis=-1)
    return OCTAGON.facet_values(x)


def _check_domain(ell, tol=1e-12):
    if np.any(ell < -tol):
        raise DomainError("(j, h) lies outside the octagon")


def reduced_H(t: TLike, j, h, phi) -> np.ndarray:
    """Reduced Hamiltonian ``Hbar_t(j, h, phi)`` (broadcasts)."""
    tt = _t(t)
    ell = _facet_values(j, h)
    _check_domain(ell)
    ell = np.clip(ell, 0.0, None)
    l = [ell[..., k] for k in range(8)]
    c = 0.16 * np.sqrt(l[1] * l[2] * l[3] * l[5] * l[6] * l[7])
    return ((1 - 2 * tt[0]) * np.asarray(h, float)
            + tt[0] * c * np.cos(phi)
            + tt[1] * 0.32 * l[3] ** 2 * l[4] ** 2
            + tt[2] * 0.32 * l[3] ** 2 * l[6] ** 2
            + tt[3] * 0.16 * l[4] ** 2 * l[6] ** 2)


def grad_hess_reduced_H(t: TLike, j: float, h: float, phi: float):
    """Analytic ``(dHbar/dh, dHbar/dphi)`` and the 2x2 Hessian in ``(h, phi)``.

    Raises
    ------
    PoleError
        If one of the six monomial facets vanishes (the square root is not
        differentiable there in these coordinates).
    """
    tt = _t(t)
    ell = _facet_values(j, h)
    _check_domain(ell)
    S = float(np.prod(ell[list(MONOMIAL_FACETS)]))
    if S <= 0.0:
        raise PoleError(f"monomial facet vanishes at (j, h) = ({j}, {h})")
    uy = OCTAGON.normal_array[:, 1]
    # d/dh log S and its derivative
    dlog = float(sum(uy[k] / ell[k] for k in MONOMIAL_FACETS))
    d2log = float(-sum(uy[k] ** 2 / ell[k] ** 2 for k in MONOMIAL_FACETS))
    c = 0.16 * math.sqrt(S)
    c_h = 0.5 * c * dlog
    c_hh = 0.5 * c * d2log + 0.25 * c * dlog ** 2
    l4, l5, l7 = ell[3], ell[4], ell[6]
    d4, d7 = uy[3], uy[6]    # l5 is constant along a slice
    P_h = (tt[1] * 0.32 * 2 * l4 * d4 * l5 ** 2
           + tt[2] * 0.32 * (2 * l4 * d4 * l7 ** 2 + 2 * l7 * d7 * l4 ** 2)
           + tt[3] * 0.16 * 2 * l7 * d7 * l5 ** 2)
    P_hh = (tt[1] * 0.32 * 2 * d4 ** 2 * l5 ** 2
            + tt[2] * 0.32 * (2 * d4 ** 2 * l7 ** 2 + 8 * l4 * d4 * l7 * d7 + 2 * d7 ** 2 * l4 ** 2)
            + tt[3] * 0.16 * 2 * d7 ** 2 * l5 ** 2)
    cp, sp = math.cos(phi), math.sin(phi)
    grad = np.array([(1 - 2 * tt[0]) + tt[0] * c_h * cp + P_h, -tt[0] * c * sp])
    hess = np.array([[tt[0] * c_hh * cp + P_hh, -tt[0] * c_h * sp],
                     [-tt[0] * c_h * sp, -tt[0] * c * cp]])
    return grad, hess


@dataclass(frozen=True)
class CriticalPoint:
    j: float
    h: float
    phi: float
    sigma: float
    value: float
    kind: CriticalType
    pole: bool = False
    fixed: bool = False
    circle: bool = False
    d2: float = float("nan")         # second derivative along the meridian
    transverse: float = float("nan")  # second derivative across it (in phi)

    @property
    def z(self) -> float:
        return math.cos(self.sigma)

    @property
    def is_extremum(self) -> bool:
        return self.kind in (CriticalType.ELLIPTIC_REGULAR, CriticalType.ELLIPTIC_ELLIPTIC)

    @property
    def is_saddle(self) -> bool:
        return self.kind is CriticalType.HYPERBOLIC_REGULAR


@dataclass(frozen=True)
class LeafInterval:
    """One leaf of ``Hbar = c`` on ``M_j`` as a Z-interval of the disc picture."""

    z_lo: float
    z_hi: float
    h_lo: float
    h_hi: float
    junctions: tuple = ()       # saddles on the leaf
    point: bool = False          # leaf is a single critical point
    circle: bool = False         # t1 = 0 latitude circle

    @property
    def stack(self) -> int:
        return 0 if self.point else len(self.junctions) + 1


class Slice:
    """Closed-form data of ``Hbar_t`` on one reduced sphere ``M_j``."""

    def __init__(self, t: TLike, j: float):
        j = float(j)
        if not 0.0 < j < 3.0:
            raise DomainError(f"reduced spheres need 0 < j < 3, got j = {j}")
        self.params = PerturbationParams.coerce(t)
        self.t = self.params.as_array()
        self.j = j
        self.lo, self.hi = OCTAGON.slice_range(j)
        self.width = self.hi - self.lo
        lower, upper = OCTAGON.slice_facets(j)
        self.lower_facets, self.upper_facets = tuple(lower), tuple(upper)
        self.lower_fixed = len(lower) >= 2
        self.upper_fixed = len(upper) >= 2
        a_idx = next(k for k in lower if k in MONOMIAL_FACETS)
        b_idx = next(k for k in upper if k in MONOMIAL_FACETS)
        self.pole_facets = (a_idx, b_idx)

        hZ = Polynomial([self.lo + self.width / 2, -self.width / 2])   # h as a polynomial in Z
        U, lam = OCTAGON.normal_array, OCTAGON.offset_array

        def ell(k):
            return Polynomial([U[k, 0] * j - lam[k], U[k, 1]])(hZ)

        t1, t2, t3, t4 = self.t
        l4, l5, l7 = ell(3), ell(4), ell(6)
        self.P = t2 * 0.32 * l4 ** 2 * l5 ** 2 + t3 * 0.32 * l4 ** 2 * l7 ** 2 + t4 * 0.16 * l5 ** 2 * l7 ** 2
        self.a = (1 - 2 * t1) * hZ + self.P
        R = Polynomial([1.0])
        for k in MONOMIAL_FACETS:
            if k not in self.pole_facets:
                R = R * ell(k)
        self.R = R
        self.B = t1 * 0.08 * self.width
        self._a_d = [self.a.deriv(m) for m in range(4)]
        self._R_d = [self.R.deriv(m) for m in range(4)]
        # level polynomial (c - a)^2 - B^2 R (1 - Z^2) = c^2 - 2 c a + base
        base = self.a ** 2 - self.B ** 2 * self.R * Polynomial([1.0, 0.0, -1.0])
        n = len(base.coef)
        self._lev_base = base.coef.copy()
        self._lev_a = np.zeros(n)
        self._lev_a[: len(self.a.coef)] = self.a.coef

    # -- coordinates -------------------------------------------------------
    def h_of_z(self, Z):
        return self.lo + self.width * (1.0 - np.asarray(Z, float)) / 2.0

    def z_of_h(self, h):
        return 1.0 - 2.0 * (np.asarray(h, float) - self.lo) / self.width

    def to_hphi(self, sigma):
        sigma = np.mod(np.asarray(sigma, float), TWO_PI)
        h = self.h_of_z(np.cos(sigma))
        phi = np.where(np.sin(sigma) >= 0.0, 0.0, math.pi)
        return h, phi

    def from_hphi(self, h, phi):
        """Meridian parameter of ``(h, phi)``; only meaningful for ``phi in {0, pi}``."""
        s = np.arccos(np.clip(self.z_of_h(h), -1.0, 1.0))
        return np.where(np.cos(phi) >= 0.0, s, TWO_PI - s)

    # -- function values ---------------------------------------------------
    def H(self, h, phi):
        return reduced_H(self.params, self.j, h, phi)

    def disc_value(self, X, Z):
        """Sphere function in the coordinates ``X = sin u cos phi``, ``Z = cos u``."""
        R = np.clip(self.R(np.asarray(Z, float)), 0.0, None)
        return self.a(Z) + self.B * np.asarray(X, float) * np.sqrt(R)

    def meridian(self, sigma, order: int = 0) -> np.ndarray:
        """``f(s), f'(s), ...`` up to ``order`` (at most 3) along the meridian.

        Returns an array with a leading axis of length ``order + 1``.
        """
        s = np.asarray(sigma, float)
        Z, z1, z2, z3 = np.cos(s), -np.sin(s), -np.cos(s), np.sin(s)

        def comp(dlist):
            p0, p1, p2, p3 = (d(Z) for d in dlist)
            return (p0, p1 * z1, p2 * z1 ** 2 + p1 * z2,
                    p3 * z1 ** 3 + 3 * p2 * z1 * z2 + p1 * z3)

        a0, a1, a2, a3 = comp(self._a_d)
        r0, r1, r2, r3 = comp(self._R_d)
        r0 = np.clip(r0, 0.0, None)
        q0 = np.sqrt(r0)
        with np.errstate(divide="ignore", invalid="ignore"):
            q1 = np.where(q0 > 0, r1 / (2 * q0), 0.0)
            q2 = np.where(q0 > 0, r2 / (2 * q0) - r1 ** 2 / (4 * q0 ** 3), 0.0)
            q3 = np.where(q0 > 0, r3 / (2 * q0) - 3 * r1 * r2 / (4 * q0 ** 3)
                          + 3 * r1 ** 3 / (8 * q0 ** 5), 0.0)
        s0, s1, s2, s3 = np.sin(s), np.cos(s), -np.sin(s), -np.cos(s)
        B = self.B
        out = [a0 + B * s0 * q0,
               a1 + B * (s1 * q0 + s0 * q1),
               a2 + B * (s2 * q0 + 2 * s1 * q1 + s0 * q2),
               a3 + B * (s3 * q0 + 3 * s2 * q1 + 3 * s1 * q2 + s0 * q3)]
        return np.stack(out[: order + 1])

    def transverse(self, sigma):
        """``d^2 Hbar / dphi^2`` at meridian points."""
        s = np.asarray(sigma, float)
        R = np.clip(self.R(np.cos(s)), 0.0, None)
        return -self.B * np.sin(s) * np.sqrt(R)

    @cached_property
    def value_scale(self) -> float:
        s = np.linspace(0.0, TWO_PI, 257)
        f = self.meridian(s)[0]
        return max(1.0, float(np.ptp(f)))

    def pole_value(self, which: str) -> float:
        return float(self.a(1.0 if which == "lower" else -1.0))

    def pole_is_fixed(self, which: str) -> bool:
        return self.lower_fixed if which == "lower" else self.upper_fixed

    @property
    def is_vertex_slice(self) -> bool:
        return self.lower_fixed or self.upper_fixed

    def level_polynomial(self, c: float) -> Polynomial:
        """``(c - a)^2 - B^2 R (1 - Z^2)``; the level set lies where it is <= 0."""
        coef = self._lev_base - 2.0 * c * self._lev_a
        coef[0] += c * c
        return Polynomial(coef)


@lru_cache(maxsize=4096)
def _slice_cached(t: tuple, j: float) -> Slice:
    return Slice(t, j)


def get_slice(t: TLike, j: float) -> Slice:
    return _slice_cached(tuple(map(float, _t(t))), float(j))


# -- critical points --------------------------------------------------------

def _classify_meridian(d2: float, trans: float, trans_norm: float, tol: float) -> CriticalType:
    # trans_norm is the transverse curvature without the sin(s)^2 factor of the polar chart
    if abs(d2) <= tol or abs(trans_norm) <= tol:
        return CriticalType.DEGENERATE
    return CriticalType.ELLIPTIC_REGULAR if d2 * trans > 0 else CriticalType.HYPERBOLIC_REGULAR


def critical_points_on_slice(t: TLike, j: float, n_samples: int = 2048,
                             degenerate_tol: float = 1e-9) -> list[CriticalPoint]:
    """All critical points of ``Hbar_t`` on ``M_j``.

    Interior critical points are the roots of ``f'`` on the meridian,
    bracketed on ``n_samples`` staggered samples and refined by Brent's
    method.  Poles appear when they are critical (``t1 = 0``, or an
    S^1-fixed vertex pole, which is always critical and is typed with
    :func:`classify_pole`).
    """
    sl = get_slice(t, j)
    ds = TWO_PI / n_samples
    s = (np.arange(n_samples) + 0.5) * ds
    d1 = sl.meridian(s, 1)[1]
    scale = sl.value_scale
    tol = degenerate_tol * scale
    fixed_sigmas = [p for p, w in ((0.0, "lower"), (math.pi, "upper")) if sl.pole_is_fixed(w)]

    def df(x):
        return float(sl.meridian(x, 1)[1])

    roots = []
    nxt = np.roll(d1, -1)
    for k in np.nonzero(np.sign(d1) != np.sign(nxt))[0]:
        a, b = s[k], s[k] + ds
        if any(a - 1e-12 <= p <= b + 1e-12 or a - 1e-12 <= p + TWO_PI <= b + 1e-12 for p in fixed_sigmas):
            continue
        if d1[k] == 0.0:
            r = a
        else:
            r = brentq(df, a, b, xtol=1e-15, rtol=1e-15, maxiter=200)
        roots.append(r % TWO_PI)

    out = []
    t1 = sl.t[0]
    circle_mode = t1 == 0.0
    seen_circle = set()
    for r in sorted(roots):
        f0, _, f2 = sl.meridian(r, 2)
        h, phi = sl.to_hphi(r)
        at_pole = min(abs(r), abs(r - math.pi), abs(r - TWO_PI)) < 1e-9
        if at_pole:
            r = 0.0 if (abs(r) < 1e-9 or abs(r - TWO_PI) < 1e-9) else math.pi
            h, phi = sl.to_hphi(r)
            f0, _, f2 = sl.meridian(r, 2)
            # t1 = 0 or R = 0 at the pole: rotationally symmetric to first order
            kind = CriticalType.DEGENERATE if abs(f2) <= tol else CriticalType.ELLIPTIC_REGULAR
            out.append(CriticalPoint(sl.j, float(h), 0.0, r, float(f0), kind, pole=True,
                                     d2=float(f2), transverse=float(f2)))
            continue
        if circle_mode:
            key = round(float(h), 9)
            if key in seen_circle:
                continue
            seen_circle.add(key)
            out.append(CriticalPoint(sl.j, float(h), 0.0, r, float(f0), CriticalType.DEGENERATE,
                                     circle=True, d2=float(f2), transverse=0.0))
            continue
        tr = float(sl.transverse(r))
        tr_norm = sl.B * math.sqrt(max(float(sl.R(math.cos(r))), 0.0))
        kind = _classify_meridian(float(f2), tr, tr_norm, tol)
        out.append(CriticalPoint(sl.j, float(h), float(phi), r, float(f0), kind,
                                 d2=float(f2), transverse=tr))
    for p, which in zip((0.0, math.pi), ("lower", "upper")):
        if sl.pole_is_fixed(which):
            ptype = classify_pole(t, j, which)
            kind = {PoleType.ELLIPTIC_ELLIPTIC: CriticalType.ELLIPTIC_ELLIPTIC,
                    PoleType.FOCUS_FOCUS: CriticalType.FOCUS_FOCUS}.get(ptype, CriticalType.DEGENERATE)
            h, _ = sl.to_hphi(p)
            out.append(CriticalPoint(sl.j, float(h), 0.0, p, sl.pole_value(which), kind,
                                     pole=True, fixed=True))
    out.sort(key=lambda cp: cp.sigma)
    return out


def morse_count(points: list[CriticalPoint]) -> int:
    """``#extrema - #saddles`` over isolated critical points."""
    ext = sum(1 for p in points if p.is_extremum and not p.circle)
    sad = sum(1 for p in points if p.is_saddle)
    return ext - sad


def classify_critical(t: TLike, j: float, h: float, phi: float,
                      grad_tol: float = 1e-6, degenerate_tol: float = 1e-8) -> CriticalType:
    """Hessian-signature type of a non-pole critical point of ``Hbar_t | M_j``."""
    grad, hess = grad_hess_reduced_H(t, j, h, phi)
    scale = max(1.0, float(np.max(np.abs(hess))))
    if np.max(np.abs(grad)) > grad_tol * scale:
        raise DomainError(f"not a critical point: gradient {grad.tolist()}")
    det = float(np.linalg.det(hess))
    norm2 = float(np.sum(hess ** 2))
    if norm2 == 0.0 or abs(det) <= degenerate_tol * norm2:
        return CriticalType.DEGENERATE
    return CriticalType.ELLIPTIC_REGULAR if det > 0 else CriticalType.HYPERBOLIC_REGULAR


def classify_pole(t: TLike, j: float, which: str, eps: float = 1e-3,
                  eps_min: float = 1e-9, n_phi: int = 64) -> PoleType:
    """Operational type of a pole of ``M_j`` from an eps-circle around it.

    S^1-fixed poles (two facets vanish) give ``ELLIPTIC_ELLIPTIC`` when
    ``Hbar - Hbar(pole)`` keeps one sign on the circle and ``FOCUS_FOCUS`` when
    it changes sign.  Other poles are ``RANK_ONE`` if critical, else ``REGULAR``.
    """
    if which not in ("lower", "upper"):
        raise ValueError("which must be 'lower' or 'upper'")
    sl = get_slice(t, j)
    h0 = sl.lo if which == "lower" else sl.hi
    sign = 1.0 if which == "lower" else -1.0
    if not sl.pole_is_fixed(which):
        # the meridian derivative at the pole is B q(pole) (up to sign)
        slope = abs(float(sl.meridian(0.0 if which == "lower" else math.pi, 1)[1]))
        return PoleType.RANK_ONE if slope <= 1e-12 * sl.value_scale else PoleType.REGULAR
    v0 = float(sl.H(h0, 0.0))
    phis = np.linspace(0.0, TWO_PI, n_phi, endpoint=False)
    e = min(eps, 0.25 * sl.width)
    while e >= eps_min:
        vals = sl.H(np.full_like(phis, h0 + sign * e), phis) - v0
        spread = float(np.max(np.abs(vals)))
        if np.min(vals) < 0.0 < np.max(vals):
            return PoleType.FOCUS_FOCUS
        if float(np.min(np.abs(vals))) > 1e-3 * spread and spread > 0.0:
            return PoleType.ELLIPTIC_ELLIPTIC
        e *= 0.1
    return PoleType.DEGENERATE


# -- exact leaves -----------------------------------------------------------

def _real_roots_in(poly: Polynomial, lo=-1.0, hi=1.0, imag_tol=1e-7) -> list[float]:
    if poly.degree() < 1:
        return []
    rts = poly.roots()
    out = sorted(float(r.real) for r in rts if abs(r.imag) <= imag_tol and lo - 1e-12 <= r.real <= hi + 1e-12)
    return [min(max(r, lo), hi) for r in out]


def level_intervals(t: TLike, j: float, c: float, value_tol: float = 1e-9,
                    critical: list[CriticalPoint] | None = None) -> list[LeafInterval]:
    """Leaves of ``Hbar_t = c`` on ``M_j`` from the disc picture (exact roots).

    A leaf is a maximal Z-interval on which the level polynomial is
    non-positive; intervals that touch at a saddle of value ``c`` form a
    single leaf whose ``junctions`` are those saddles.  Extrema of value
    ``c`` are returned as point leaves.
    """
    sl = get_slice(t, j)
    if critical is None:
        critical = critical_points_on_slice(t, j)
    vtol = value_tol * sl.value_scale
    on_level = [p for p in critical if abs(p.value - c) <= vtol]
    saddles = sorted((p for p in on_level if p.is_saddle), key=lambda p: p.z)
    extrema = [p for p in on_level if p.is_extremum]

    if sl.B == 0.0:
        # latitude circles where a(Z) = c
        roots = _real_roots_in(sl.a - c)
        uniq = []
        for r in roots:
            if not uniq or abs(r - uniq[-1]) > 1e-9:
                uniq.append(r)
        leaves = []
        for r in uniq:
            h = float(sl.h_of_z(r))
            pole = abs(abs(r) - 1.0) < 1e-12
            leaves.append(LeafInterval(r, r, h, h, point=pole, circle=not pole))
        return leaves

    D = sl.level_polynomial(c)
    roots = _real_roots_in(D)
    # a pole on the level is a multiple root; numerics scatter it by ~eps**(1/m)
    for pz, which in ((1.0, "lower"), (-1.0, "upper")):
        if abs(sl.pole_value(which) - c) <= vtol:
            roots = [pz if abs(r - pz) < 1e-5 else r for r in roots]
    cuts = [-1.0] + roots + [1.0]
    neg = []
    for a, b in zip(cuts, cuts[1:]):
        if b - a <= 0.0:
            continue
        if float(D(0.5 * (a + b))) <= 0.0:
            if neg and a - neg[-1][1] <= 1e-12:
                neg[-1][1] = b
            else:
                neg.append([a, b])
    # join across saddle gaps and absorb extrema-induced slivers
    ztol = 1e-6
    merged: list[list] = []
    for a, b in neg:
        if merged:
            pa, pb, js = merged[-1]
            gap_saddles = [p for p in saddles if pb - ztol <= p.z <= a + ztol]
            if gap_saddles and a - pb <= 10 * ztol:
                merged[-1][1] = b
                continue
        merged.append([a, b, []])
    leaves = []
    used_extrema = set()
    for a, b, _ in merged:
        inside = tuple(p for p in saddles if a - ztol <= p.z <= b + ztol)
        ext_here = [p for p in extrema if a - ztol <= p.z <= b + ztol]
        if b - a <= 10 * ztol and ext_here and not inside:
            used_extrema.update(id(p) for p in ext_here)
            z = ext_here[0].z
            leaves.append(LeafInterval(z, z, float(sl.h_of_z(z)), float(sl.h_of_z(z)), point=True))
            continue
        leaves.append(LeafInterval(a, b, float(sl.h_of_z(b)), float(sl.h_of_z(a)), junctions=inside))
    for p in extrema:
        if id(p) not in used_extrema and not any(l.z_lo - ztol <= p.z <= l.z_hi + ztol for l in leaves):
            leaves.append(LeafInterval(p.z, p.z, p.h, p.h, point=True))
    leaves.sort(key=lambda l: l.z_lo)
    return leaves


def leaf_count_exact(t: TLike, j: float, c: float) -> int:
    return len(level_intervals(t, j, c))
