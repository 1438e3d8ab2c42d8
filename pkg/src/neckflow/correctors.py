"""Divergence-free corrector hierarchies for the three rigid boundary modes.

For each boundary mode psi_1=(1,0), psi_2=(0,1), psi_3=(x2,-x1) the hierarchy
is a sequence of velocity/pressure pairs (v^l, p_l), l = 1..m+1, with

  * v^1 matching psi_alpha on the top wall and 0 on the bottom wall,
  * v^l vanishing on both walls for l >= 2,
  * div v^l = 0 exactly,
  * the cumulative residual f^l = mu*Lap(sum v) - grad(sum p) gaining one
    power of the gap width per level.

Each level stores its residual in the reduced form produced by the
construction (degrees are structural); `verify_level` certifies numerically
that the reduced form equals mu*Lap(v^l) - grad(p_l) + f^{l-1}.

For identical walls a Green-kernel variant builds the same objects by
resolving d^2/dx2^2 directly on each gap fiber; it gains half an order of
decay per derivative over the general construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import coeffs as ca
from .coeffs import Coeff
from .fields import (
    PolyField,
    ScalarPressure,
    VectorField2,
    cheb_nodes,
    fiber_x2,
    keller_field,
    keller_plus_half,
    keller_x1_deriv,
    ksq_minus_quarter,
    sup_abs,
    trace,
    x2_field,
)
from .geometry import NeckProfile

__all__ = [
    "LEVEL_CAP",
    "ConstructionError",
    "CorrectorLevel",
    "CorrectorHierarchy",
    "build_first_level",
    "extend",
    "build_hierarchy",
    "build_symmetric_green",
    "verify_level",
    "psi_top_traces",
]

LEVEL_CAP = 6

# residual x2-degrees of the constructions: (first component, second component)
RESIDUAL_DEGREES = {
    1: lambda l: (2 * l, 2 * l + 1),
    2: lambda l: (2 * l + 2, 2 * l + 3),
    3: lambda l: (4, 5) if l == 1 else (2 * l, 2 * l + 1),
}


class ConstructionError(RuntimeError):
    """A hierarchy level violated its structural degree contract."""


@dataclass
class CorrectorLevel:
    alpha: int
    level: int
    v: VectorField2
    pressure: ScalarPressure
    residual: VectorField2  # cumulative: mu*Lap(sum v) - grad(sum p) through this level
    split: tuple = field(default=None, repr=False)  # mode-specific recursion state


@dataclass
class CorrectorHierarchy:
    profile: NeckProfile
    alpha: int
    levels: list
    green: bool = False

    @property
    def depth(self) -> int:
        return len(self.levels)

    def level(self, l: int) -> CorrectorLevel:
        return self.levels[l - 1]

    def residual(self, l: int | None = None) -> VectorField2:
        return self.levels[(l or self.depth) - 1].residual

    def cumulative_v(self, upto: int | None = None) -> VectorField2:
        upto = upto or self.depth
        out = self.levels[0].v
        for lev in self.levels[1:upto]:
            out = out + lev.v
        return out

    def cumulative_pressure(self, upto: int | None = None) -> ScalarPressure:
        upto = upto or self.depth
        out = self.levels[0].pressure
        for lev in self.levels[1:upto]:
            out = out + lev.pressure
        return out

    def extend_to(self, depth: int) -> "CorrectorHierarchy":
        while self.depth < depth:
            extend(self)
        return self

    def dump_sexp(self) -> str:
        lines = [f"(hierarchy alpha={self.alpha} green={int(self.green)} profile={self.profile.name})"]
        for lev in self.levels:
            lines.append(f"(level {lev.level}")
            for tag, f in (("v1", lev.v.u1), ("v2", lev.v.u2),
                           ("f1", lev.residual.u1), ("f2", lev.residual.u2)):
                for j, c in enumerate(f.coeffs):
                    lines.append(f"  ({tag} {j} {c.sexp()})")
            lines.append(f"  (p-pure {lev.pressure.pure.sexp()})")
            for j, c in enumerate(lev.pressure.poly.coeffs):
                lines.append(f"  (p-poly {j} {c.sexp()})")
            lines.append(")")
        return "\n".join(lines)


# -- shared building blocks ---------------------------------------------------


def _context(profile: NeckProfile):
    d = ca.delta_coeff(profile)
    dh = ca.lin([(ca.profile_deriv(profile, 1, 0), 1.0),
                 (ca.profile_deriv(profile, 2, 0), -1.0)])
    q4 = ca.q4_coeff(profile)
    return d, dh, q4


def _cancel_row(profile: NeckProfile, target: PolyField, top: int) -> list[Coeff]:
    """Row F1^i, i=0..top, satisfying
    mu * d2/dx2^2 [ (sum_i F1^i x2^i) (k^2 - 1/4) ] = -target."""
    if target.degree > top:
        raise ConstructionError(
            f"cancellation target has degree {target.degree} > {top}")
    d, dh, q4 = _context(profile)
    mu = profile.mu
    F = [ca.const(0.0)] * (top + 3)
    for i in range(top, -1, -1):
        s_i = target.coeff(i)
        F[i] = ca.lin([
            (ca.mul_pow([(d, 2), (s_i, 1)]), -1.0 / (mu * (i + 1) * (i + 2))),
            (dh * F[i + 1], 1.0),
            (q4 * F[i + 2], 1.0),
        ])
    return F[: top + 1]


def _divfree_row(profile: NeckProfile, F1: list[Coeff]):
    """Row F2^i, i=0..len(F1), making the polynomial block's divergence a pure
    function of x1; returns (F2, R) with R that leftover 0-th order term."""
    d, dh, q4 = _context(profile)
    inv_d2 = ca.mul_pow([(d, -2)])
    top2 = len(F1)

    def f1(i):
        return F1[i] if 0 <= i < len(F1) else ca.const(0.0)

    F2 = [ca.const(0.0)] * (top2 + 3)
    for i in range(top2, -1, -1):
        inner = ca.lin([(f1(i - 1), 1.0), (dh * f1(i), -1.0), (q4 * f1(i + 1), -1.0)])
        F2[i] = ca.lin([
            (dh * F2[i + 1], 1.0),
            (q4 * F2[i + 2], 1.0),
            (ca.mul_pow([(d, 2), (ca.coeff_diff(inner * inv_d2), 1)]), -1.0 / (i + 2)),
        ])
    F2 = F2[: top2 + 1]
    R = ca.lin([
        (ca.coeff_diff(ca.mul_pow([(q4, 1), (f1(0), 1), (d, -2)])), -1.0),
        (ca.mul_pow([(q4, 1), (F2[1], 1), (d, -2)]), -1.0),
        (ca.mul_pow([(dh, 1), (F2[0], 1), (d, -2)]), -1.0),
    ])
    return F2, R


def _tilde_pair(profile: NeckProfile, R: Coeff):
    """Divergence closers: F1t(x1) = 6 int_0^{x1} delta*R / delta and the
    matching degree-1 companion F2t = -2 delta R k - delta dk/dx1 F1t."""
    d, _, _ = _context(profile)
    F1t = ca.quotient(ca.lin([(ca.antideriv(0.0, d * R), 6.0)]), d)
    k = keller_field(profile)
    dk = keller_x1_deriv(profile)
    F2t = k.scale(ca.mul_pow([(d, 1), (R, 1)], -2.0)) + dk.scale(ca.lin([(d * F1t, -1.0)]))
    return F1t, F2t


def _assemble_v(profile, F1, F1t, F2, F2t) -> VectorField2:
    kq = ksq_minus_quarter(profile)
    comp1 = (PolyField(profile, F1) + PolyField(profile, [F1t])) * kq
    comp2 = (PolyField(profile, F2) + F2t) * kq
    return VectorField2(comp1, comp2)


def _pure_pressure(profile: NeckProfile, F1t: Coeff) -> Coeff:
    """2 mu int_0^{x1} F1t / delta^2, cancelling the leading term the closer adds."""
    d, _, _ = _context(profile)
    if ca.is_zero(F1t):
        return ca.const(0.0)
    return ca.lin([(ca.antideriv(0.0, ca.mul_pow([(F1t, 1), (d, -2)])), 2.0 * profile.mu)])


def _check_degrees(alpha: int, l: int, residual: VectorField2):
    d1, d2 = RESIDUAL_DEGREES[alpha](l)
    if residual.u1.degree > d1 or residual.u2.degree > d2:
        raise ConstructionError(
            f"alpha={alpha} level {l}: residual degrees "
            f"({residual.u1.degree},{residual.u2.degree}) exceed ({d1},{d2})")
    cap = 2 * l + 3
    for f in (residual.u1, residual.u2):
        if f.degree > cap:
            raise ConstructionError(f"degree cap {cap} violated at level {l}")


# -- first levels -------------------------------------------------------------


def _first_level_mode1(profile: NeckProfile) -> CorrectorLevel:
    mu = profile.mu
    d, dh, _ = _context(profile)
    dh1 = ca.profile_deriv(profile, 1, 1)
    dh2 = ca.profile_deriv(profile, 2, 1)
    k = keller_field(profile)
    kq = ksq_minus_quarter(profile)
    dk = keller_x1_deriv(profile)

    F = ca.quotient(ca.lin([(dh, -3.0)]), d)
    G = (k.scale(ca.lin([(dh1, 1.0), (dh2, -1.0)]))
         + PolyField(profile, [ca.lin([(dh1, 0.5), (dh2, 0.5)])])
         + dk.scale(ca.lin([(dh, 3.0)])))
    v = VectorField2(keller_plus_half(profile) + kq.scale(F), G * kq)

    # pure part: 6 mu int_{x1}^{R} (h1-h2)/delta^3 = -6 mu int_R^{x1} ...
    integrand = ca.mul_pow([(dh, 1), (d, -3)])
    pure = ca.lin([(ca.antideriv(profile.R, integrand), -6.0 * mu)])
    poly = v.u2.partial_x2().scale(mu)
    pressure = ScalarPressure(poly, pure)

    f1 = (v.u1.partial_x1() - v.u2.partial_x2()).partial_x1().scale(mu)
    f2 = v.u2.partial_x1(2).scale(mu)
    residual = VectorField2(f1, f2)
    _check_degrees(1, 1, residual)
    return CorrectorLevel(1, 1, v, pressure, residual)


def _first_level_mode2(profile: NeckProfile) -> CorrectorLevel:
    mu = profile.mu
    d, _, _ = _context(profile)
    k = keller_field(profile)
    kq = ksq_minus_quarter(profile)
    dk = keller_x1_deriv(profile)

    F = ca.quotient(ca.lin([(ca.X1, 6.0)]), d)
    G = k.scale(-2.0) + dk.scale(ca.lin([(ca.X1, -6.0)]))
    v_t = VectorField2(kq.scale(F), keller_plus_half(profile) + G * kq)

    # pure part: -12 mu int_{x1}^{R} y/delta^3 = +12 mu int_R^{x1} ...
    integrand = ca.mul_pow([(ca.X1, 1), (d, -3)])
    pure_t = ca.lin([(ca.antideriv(profile.R, integrand), 12.0 * mu)])
    poly_t = v_t.u2.partial_x2().scale(mu)

    g1 = (v_t.u1.partial_x1() - v_t.u2.partial_x2()).partial_x1().scale(mu)
    F11 = _cancel_row(profile, g1, 2)
    F21, R = _divfree_row(profile, F11)
    F1t, F2t = _tilde_pair(profile, R)
    v_h = _assemble_v(profile, F11, F1t, F21, F2t)

    v = v_t + v_h
    pressure = ScalarPressure(poly_t, pure_t + _pure_pressure(profile, F1t))

    s_part = v_t.u2.partial_x1(2).scale(mu) + v_h.u2.partial_x2(2).scale(mu)
    g_part = v_h.u2.partial_x1(2).scale(mu)
    f1 = v_h.u1.partial_x1(2).scale(mu)
    residual = VectorField2(f1, s_part + g_part)
    _check_degrees(2, 1, residual)
    return CorrectorLevel(2, 1, v, pressure, residual, split=(s_part, g_part))


def _first_level_mode3(profile: NeckProfile) -> CorrectorLevel:
    mu = profile.mu
    eps = profile.eps
    d, dh, _ = _context(profile)
    sh = ca.lin([(ca.profile_deriv(profile, 1, 0), 1.0),
                 (ca.profile_deriv(profile, 2, 0), 1.0)])
    dsh = ca.lin([(ca.profile_deriv(profile, 1, 1), 1.0),
                  (ca.profile_deriv(profile, 2, 1), 1.0)])
    k = keller_field(profile)
    kp = keller_plus_half(profile)
    kq = ksq_minus_quarter(profile)
    dk = keller_x1_deriv(profile)
    x2f = x2_field(profile)

    # F = Fa - 3(h1-h2) x2 / (2 delta) - 5 k x2 with Fa = 1 - (h1+h2+3x1^2)/delta
    x1sq = ca.mul_pow([(ca.X1, 2)])
    Fa = ca.lin([(ca.mul_pow([(ca.lin([(sh, 1.0), (x1sq, 3.0)]), 1), (d, -1)]), -1.0)], 1.0)
    F_rest = x2f.scale(ca.mul_pow([(dh, 1), (d, -1)], -1.5)) + (k * x2f).scale(-5.0)
    F = PolyField(profile, [Fa]) + F_rest

    # G = Gc + Grest; Gc = 2 x1 k - (eps - 3 x1^2) dk
    Gc = k.scale(ca.lin([(ca.X1, 2.0)])) + dk.scale(ca.lin([(x1sq, 3.0)], -eps))
    Grest = (k * dk * x2f).scale(ca.lin([(d, 3.0)])) + (dk * x2f).scale(ca.lin([(dh, 1.5)]))
    G = Gc + Grest

    v = VectorField2(x2f * kp + F * kq, kp.scale(ca.lin([(ca.X1, -1.0)])) + G * kq)

    r_field = (Gc * kq).partial_x2().scale(mu)
    # pure part: 2 mu x1/delta^2 - 2 mu int_{x1}^{R} (2y(h1+h2)' - (h1+h2) - 3y^2)/delta^3
    integrand = ca.mul_pow([
        (ca.lin([(ca.X1 * dsh, 2.0), (sh, -1.0), (x1sq, -3.0)]), 1), (d, -3)])
    pure = ca.lin([
        (ca.mul_pow([(ca.X1, 1), (d, -2)]), 2.0 * mu),
        (ca.antideriv(profile.R, integrand), 2.0 * mu),
    ])
    pressure = ScalarPressure(r_field, pure)

    # Residual split by magnitude family: per-degree-j coefficients one power
    # of the gap worse than O(delta^-j) go into the part the next level
    # cancels.  Terms carrying an explicit x2 factor before the second
    # x1-derivative stay mild; the Fa block and the wall-normal second
    # derivatives do not.
    s_part = (PolyField(profile, [ca.mul_pow([(d, -1)], 2.0 * mu)])
              + (F_rest * kq).partial_x2(2).scale(mu)
              - r_field.partial_x1()
              + (kq.scale(Fa)).partial_x1(2).scale(mu))
    g_part = (x2f * kp + F_rest * kq).partial_x1(2).scale(mu)
    st_part = ((Grest * kq).partial_x2(2).scale(mu)
               + (kp.scale(ca.lin([(ca.X1, -1.0)])) + Gc * kq).partial_x1(2).scale(mu))
    gt_part = (Grest * kq).partial_x1(2).scale(mu)
    residual = VectorField2(s_part + g_part, st_part + gt_part)
    _check_degrees(3, 1, residual)
    return CorrectorLevel(3, 1, v, pressure, residual,
                          split=(s_part, g_part, st_part, gt_part))


def build_first_level(profile: NeckProfile, alpha: int) -> CorrectorLevel:
    """First corrector pair carrying the mode's boundary data into the gap."""
    if alpha == 1:
        return _first_level_mode1(profile)
    if alpha == 2:
        return _first_level_mode2(profile)
    if alpha == 3:
        return _first_level_mode3(profile)
    raise ValueError("alpha must be 1, 2 or 3")


# -- induction steps ----------------------------------------------------------


def _generic_step(profile: NeckProfile, prev: VectorField2, l: int):
    """One level of the default induction: cancel the full first component,
    close the divergence, then integrate away the second component's core."""
    mu = profile.mu
    F1 = _cancel_row(profile, prev.u1, 2 * l - 2)
    F2, R = _divfree_row(profile, F1)
    F1t, F2t = _tilde_pair(profile, R)
    v = _assemble_v(profile, F1, F1t, F2, F2t)
    p_pure = _pure_pressure(profile, F1t)

    s_tilde = prev.u2 + v.u2.partial_x2(2).scale(mu)
    p_poly = s_tilde.antideriv_x2()
    pressure = ScalarPressure(p_poly, p_pure)

    f1 = v.u1.partial_x1(2).scale(mu) - p_poly.partial_x1()
    f2 = v.u2.partial_x1(2).scale(mu)
    return v, pressure, VectorField2(f1, f2)


def _extend_mode1(h: CorrectorHierarchy) -> CorrectorLevel:
    l = h.depth + 1
    v, pressure, residual = _generic_step(h.profile, h.residual(), l)
    _check_degrees(1, l, residual)
    return CorrectorLevel(1, l, v, pressure, residual)


def _extend_mode2(h: CorrectorHierarchy) -> CorrectorLevel:
    profile = h.profile
    mu = profile.mu
    l = h.depth + 1
    prev = h.levels[-1]
    s_prev, g_prev = prev.split

    p_poly = s_prev.antideriv_x2()
    a_sum = prev.residual.u1 - p_poly.partial_x1()
    F1 = _cancel_row(profile, a_sum, 2 * l)
    F2, R = _divfree_row(profile, F1)
    F1t, F2t = _tilde_pair(profile, R)
    v = _assemble_v(profile, F1, F1t, F2, F2t)
    pressure = ScalarPressure(p_poly, _pure_pressure(profile, F1t))

    s_new = g_prev + v.u2.partial_x2(2).scale(mu)
    g_new = v.u2.partial_x1(2).scale(mu)
    f1 = v.u1.partial_x1(2).scale(mu)
    residual = VectorField2(f1, s_new + g_new)
    _check_degrees(2, l, residual)
    return CorrectorLevel(2, l, v, pressure, residual, split=(s_new, g_new))


def _extend_mode3(h: CorrectorHierarchy) -> CorrectorLevel:
    profile = h.profile
    mu = profile.mu
    l = h.depth + 1
    if l == 2:
        s1, g1, st1, gt1 = h.levels[0].split
        F1 = _cancel_row(profile, s1, 2)
        F2, R = _divfree_row(profile, F1)
        F1t, F2t = _tilde_pair(profile, R)
        v = _assemble_v(profile, F1, F1t, F2, F2t)
        p_pure = _pure_pressure(profile, F1t)

        s_bar = st1 + v.u2.partial_x2(2).scale(mu)
        p_poly = s_bar.antideriv_x2()
        pressure = ScalarPressure(p_poly, p_pure)

        f1 = g1 + v.u1.partial_x1(2).scale(mu) - p_poly.partial_x1()
        f2 = gt1 + v.u2.partial_x1(2).scale(mu)
        residual = VectorField2(f1, f2)
    else:
        v, pressure, residual = _generic_step(profile, h.residual(), l)
    _check_degrees(3, l, residual)
    return CorrectorLevel(3, l, v, pressure, residual)


def _extend_green(h: CorrectorHierarchy) -> CorrectorLevel:
    profile = h.profile
    mu = profile.mu
    l = h.depth + 1
    d, _, _ = _context(profile)
    half = ca.mul_pow([(d, 1)], 0.5)
    x2f = x2_field(profile)
    xm = x2f + PolyField(profile, [ca.lin([(half, -1.0)])])
    xp = x2f + PolyField(profile, [half])

    f_prev = h.residual()
    A = f_prev.u1.antideriv_x2()
    C = (xm * f_prev.u1).antideriv_x2()
    c_hi = C.subs_x2(half)
    c_lo = C.subs_x2(ca.lin([(half, -1.0)]))
    a_lo = A.subs_x2(ca.lin([(half, -1.0)]))

    # resolve mu d^2/dx2^2 v1 = -f_prev.u1 with zero trace on both walls
    t_bd = (xm.scale(ca.quotient(ca.lin([(c_lo, -1.0), (d * a_lo, -1.0)]), d))
            + xp.scale(ca.quotient(c_hi, d)))
    v1 = (C.scale(-1.0) + xm * A + t_bd).scale(-1.0 / mu)

    Dfld = v1.partial_x1().antideriv_x2()
    d_lo = Dfld.subs_x2(ca.lin([(half, -1.0)]))
    v2 = Dfld.scale(-1.0) + PolyField(profile, [d_lo])
    v = VectorField2(v1, v2)

    p_poly = (f_prev.u2 + v2.partial_x2(2).scale(mu)).antideriv_x2()
    pressure = ScalarPressure(p_poly, ca.const(0.0))

    f1 = v1.partial_x1(2).scale(mu) - p_poly.partial_x1()
    f2 = v2.partial_x1(2).scale(mu)
    residual = VectorField2(f1, f2)
    _check_degrees(1, l, residual)
    return CorrectorLevel(1, l, v, pressure, residual)


def extend(h: CorrectorHierarchy) -> CorrectorLevel:
    """Append the next level; levels are capped at LEVEL_CAP."""
    if h.depth >= LEVEL_CAP:
        raise ConstructionError(f"level cap {LEVEL_CAP} reached")
    if h.green:
        lev = _extend_green(h)
    elif h.alpha == 1:
        lev = _extend_mode1(h)
    elif h.alpha == 2:
        lev = _extend_mode2(h)
    else:
        lev = _extend_mode3(h)
    h.levels.append(lev)
    return lev


def build_hierarchy(profile: NeckProfile, alpha: int, levels: int) -> CorrectorHierarchy:
    if not 1 <= levels <= LEVEL_CAP:
        raise ValueError(f"levels must be in 1..{LEVEL_CAP}")
    h = CorrectorHierarchy(profile, alpha, [build_first_level(profile, alpha)])
    return h.extend_to(levels)


def build_symmetric_green(profile: NeckProfile, levels: int) -> CorrectorHierarchy:
    """Green-kernel hierarchy for identical walls (first boundary mode)."""
    if not profile.symmetric:
        raise ValueError("the Green-kernel construction needs h1 == h2")
    if not 1 <= levels <= LEVEL_CAP:
        raise ValueError(f"levels must be in 1..{LEVEL_CAP}")
    mu = profile.mu
    d, _, _ = _context(profile)
    dd = ca.lin([(ca.profile_deriv(profile, 1, 1), 1.0),
                 (ca.profile_deriv(profile, 2, 1), 1.0)])  # delta'
    inv_d = ca.mul_pow([(d, -1)])
    v1 = PolyField(profile, [ca.const(0.5), inv_d])
    v2 = PolyField(profile, [
        ca.lin([(dd, -0.125)]),
        ca.const(0.0),
        ca.mul_pow([(dd, 1), (d, -2)], 0.5),
    ])
    p_poly = PolyField(profile, [ca.const(0.0), ca.mul_pow([(dd, 1), (d, -2)], mu)])
    pressure = ScalarPressure(p_poly, ca.const(0.0))
    f1 = v1.partial_x1(2).scale(mu) - p_poly.partial_x1()
    f2 = v2.partial_x1(2).scale(mu)
    lev = CorrectorLevel(1, 1, VectorField2(v1, v2), pressure, VectorField2(f1, f2))
    h = CorrectorHierarchy(profile, 1, [lev], green=True)
    return h.extend_to(levels)


# -- numerical certification ---------------------------------------------------


def green_kernel(profile: NeckProfile, x1: float, x2: float, y: float) -> float:
    """Fiber kernel resolving d^2/dy^2 with zero values on both walls."""
    d = float(profile.delta(x1))
    lo, hi = -0.5 * d, 0.5 * d
    if not (lo <= x2 <= hi and lo <= y <= hi):
        raise ValueError("kernel arguments outside the gap fiber")
    if y <= x2:
        return (y + 0.5 * d) * (x2 - 0.5 * d) / d
    return (x2 + 0.5 * d) * (y - 0.5 * d) / d


def psi_top_traces(profile: NeckProfile, alpha: int) -> tuple[Coeff, Coeff]:
    """The mode's boundary data on the top wall as coefficient functions."""
    if alpha == 1:
        return ca.const(1.0), ca.const(0.0)
    if alpha == 2:
        return ca.const(0.0), ca.const(1.0)
    top = ca.lin([(ca.profile_deriv(profile, 1, 0), 1.0)], profile.eps / 2.0)
    return top, ca.lin([(ca.X1, -1.0)])


def verify_level(h: CorrectorHierarchy, l: int, n1: int = 201, n2: int = 33,
                 n_trace: int = 1000) -> dict:
    """Certify one level: divergence, wall traces, degrees and the identity
    residual_l == residual_{l-1} + mu*Lap(v_l) - grad(p_l), all sampled."""
    profile = h.profile
    lev = h.level(l)
    r = profile.R
    out = {"alpha": h.alpha, "level": l}

    out["div_sup"] = sup_abs(lev.v.divergence(), r=r, n1=n1, n2=n2)

    xs = np.linspace(-r, r, n_trace)
    if l == 1:
        t1, t2 = psi_top_traces(profile, h.alpha)
        top_err = [trace(lev.v.u1, "top") - t1, trace(lev.v.u2, "top") - t2]
    else:
        top_err = [trace(lev.v.u1, "top"), trace(lev.v.u2, "top")]
    bot_err = [trace(lev.v.u1, "bottom"), trace(lev.v.u2, "bottom")]
    out["trace_sup"] = max(
        float(np.max(np.abs(ca.coeff_eval(c, xs)))) for c in top_err + bot_err
    )

    out["degrees"] = (lev.residual.u1.degree, lev.residual.u2.degree)
    out["expected_degrees"] = RESIDUAL_DEGREES[h.alpha](l)

    # identity check on a coarse grid: reduced residual vs direct evaluation
    x1 = cheb_nodes(41, -r, r)
    x2 = fiber_x2(profile, x1, 9)
    direct = lev.v.laplacian().scale(profile.mu)
    grad_p = lev.pressure.gradient()
    err = 0.0
    scale = 1e-300
    for comp in (1, 2):
        red = getattr(lev.residual, f"u{comp}").eval(x1, x2)
        lap = getattr(direct, f"u{comp}").eval(x1, x2)
        gp = getattr(grad_p, f"u{comp}").eval(x1, x2)
        prev = 0.0
        if l > 1:
            prev = getattr(h.level(l - 1).residual, f"u{comp}").eval(x1, x2)
        err = max(err, float(np.max(np.abs(red - (prev + lap - gp)))))
        scale = max(scale, float(np.max(np.abs(lap))), float(np.max(np.abs(gp))))
    out["identity_abs"] = err
    out["identity_rel"] = err / scale
    return out
