"""Neck geometry: wall profiles, gap width and the normalized vertical coordinate.

The thin region between two nearly touching rigid bodies is charted by
``|x1| <= 2R`` with walls ``x2 = eps/2 + h1(x1)`` (top) and
``x2 = -eps/2 - h2(x1)`` (bottom).  The gap width is
``delta(x1) = eps + h1(x1) + h2(x1)`` and the normalized vertical coordinate

    k(x) = (x2 - (h1 - h2)(x1)/2) / delta(x1)

equals +1/2 on the top wall and -1/2 on the bottom wall.  Profiles are
polynomials in ``x1``, so derivatives of every order are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = [
    "DomainError",
    "ProfileFn",
    "NeckProfile",
    "delta",
    "keller",
    "keller_grad",
    "named_profile",
    "profile_from_json",
    "NAMED_PROFILES",
]

CHECK_TOL = 1e-12


class DomainError(ValueError):
    """Evaluation requested outside the neck chart."""


class ProfileFn:
    """Polynomial wall profile ``h(x1) = sum_j c_j x1**j``.

    Derivatives of any order are exact; orders above the degree are zero.
    """

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Iterable[float]):
        coeffs = [float(c) for c in coefficients]
        while coeffs and coeffs[-1] == 0.0:
            coeffs.pop()
        self.coefficients = tuple(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def deriv(self, order: int = 1) -> "ProfileFn":
        if order < 0:
            raise ValueError("derivative order must be >= 0")
        coeffs = list(self.coefficients)
        for _ in range(order):
            coeffs = [j * c for j, c in enumerate(coeffs)][1:]
            if not coeffs:
                break
        return ProfileFn(coeffs)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c in reversed(self.coefficients):
            out = out * x + c
        return out if out.ndim else float(out)

    def __eq__(self, other):
        return isinstance(other, ProfileFn) and self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def __repr__(self):
        return f"ProfileFn({list(self.coefficients)})"


@dataclass(eq=False)
class NeckProfile:
    """Geometry and material data for one neck configuration.

    ``M`` caps the wall-derivative order the coefficient algebra may request;
    polynomial profiles are smooth, so the cap mirrors a declared regularity
    rather than a computational limit.
    """

    eps: float
    h1: ProfileFn
    h2: ProfileFn
    R: float = 0.5
    mu: float = 1.0
    kappa: float | None = None
    M: int = 64
    name: str = "custom"

    symmetric: bool = field(init=False)
    _intern: dict = field(init=False, repr=False, default_factory=dict)
    _positive_ids: set = field(init=False, repr=False, default_factory=set)

    def __post_init__(self):
        if not (self.eps > 0 and self.R > 0 and self.mu > 0):
            raise ValueError("eps, R, mu must be positive")
        if self.M < 1:
            raise ValueError("M must be >= 1")
        self.symmetric = self.h1 == self.h2
        if self.symmetric:
            self.h2 = self.h1  # share the object so both walls alias one profile
        self._validate()

    def _validate(self):
        for i, h in ((1, self.h1), (2, self.h2)):
            if abs(h(0.0)) > CHECK_TOL or abs(h.deriv()(0.0)) > CHECK_TOL:
                raise ValueError(f"h{i} must vanish to second order at x1=0")
        x = np.linspace(-2 * self.R, 2 * self.R, 801)
        gap = self.h1(x) + self.h2(x)
        d = self.eps + gap
        if np.any(d <= 0):
            raise ValueError("delta(x1) must be positive on [-2R, 2R]")
        xs = x[np.abs(x) > 1e-9]
        ratio = (self.h1(xs) + self.h2(xs)) / xs**2
        kappa_obs = float(ratio.min())
        if self.kappa is None:
            if kappa_obs <= 0:
                raise ValueError("h1 + h2 is not uniformly convex near 0")
            self.kappa = kappa_obs
        elif kappa_obs < self.kappa - CHECK_TOL:
            raise ValueError(
                f"h1 + h2 >= kappa*x1^2 fails: observed {kappa_obs:.6g} < {self.kappa:.6g}"
            )

    # -- wall data ------------------------------------------------------

    def h(self, wall: int) -> ProfileFn:
        if wall == 1:
            return self.h1
        if wall == 2:
            return self.h2
        raise ValueError("wall must be 1 or 2")

    def delta(self, x1):
        return self.eps + self.h1(x1) + self.h2(x1)

    def top(self, x1):
        return self.eps / 2 + self.h1(x1)

    def bottom(self, x1):
        return -self.eps / 2 - self.h2(x1)

    def check_x1(self, x1):
        if np.any(np.abs(np.asarray(x1)) > 2 * self.R * (1 + 1e-12)):
            raise DomainError(f"|x1| exceeds the chart half-width {2 * self.R}")

    def check_point(self, x1, x2):
        self.check_x1(x1)
        lo, hi = self.bottom(x1), self.top(x1)
        pad = 1e-12 * (1.0 + np.abs(hi - lo))
        if np.any(np.asarray(x2) < lo - pad) or np.any(np.asarray(x2) > hi + pad):
            raise DomainError("point lies outside the closed neck region")


def delta(profile: NeckProfile, x1):
    """Gap width eps + h1 + h2 at ``x1`` (chart-checked)."""
    profile.check_x1(x1)
    return profile.delta(x1)


def keller(profile: NeckProfile, x1, x2):
    """Normalized vertical coordinate; +-1/2 on the top/bottom walls."""
    profile.check_point(x1, x2)
    c = (profile.h1(x1) - profile.h2(x1)) / 2.0
    return (x2 - c) / profile.delta(x1)


def keller_grad(profile: NeckProfile, x1, x2):
    """Exact gradient of :func:`keller`.

    d/dx1 = -(h1'-h2')/(2 delta) - (h1'+h2') k / delta,  d/dx2 = 1/delta.
    """
    profile.check_point(x1, x2)
    d = profile.delta(x1)
    dh1 = profile.h1.deriv()(x1)
    dh2 = profile.h2.deriv()(x1)
    k = keller(profile, x1, x2)
    gx1 = -(dh1 - dh2) / (2.0 * d) - (dh1 + dh2) * k / d
    gx2 = 1.0 / d
    return gx1, gx2


# -- built-in profiles ----------------------------------------------------

NAMED_PROFILES = {
    "sym-quadratic": (ProfileFn([0, 0, 0.5]), ProfileFn([0, 0, 0.5])),
    "asym-quadratic": (ProfileFn([0, 0, 1.0]), ProfileFn([0, 0, 0.5])),
    "sym-quartic": (ProfileFn([0, 0, 0.5, 0, 1.0]), ProfileFn([0, 0, 0.5, 0, 1.0])),
    "asym-quartic": (ProfileFn([0, 0, 0.5, 0, 1.0]), ProfileFn([0, 0, 0.5])),
}


def named_profile(name: str, eps: float, R: float = 0.5, mu: float = 1.0, M: int = 64) -> NeckProfile:
    try:
        h1, h2 = NAMED_PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choices: {sorted(NAMED_PROFILES)}") from None
    return NeckProfile(eps=eps, h1=h1, h2=h2, R=R, mu=mu, M=M, name=name)


def profile_from_json(doc: dict) -> NeckProfile:
    """Build a profile from ``{"eps":..,"R":..,"mu":..,"h1":{"poly":[...]},"h2":...}``."""
    try:
        h1 = ProfileFn(doc["h1"]["poly"])
        h2 = ProfileFn(doc["h2"]["poly"])
        return NeckProfile(
            eps=float(doc["eps"]),
            h1=h1,
            h2=h2,
            R=float(doc.get("R", 0.5)),
            mu=float(doc.get("mu", 1.0)),
            kappa=doc.get("kappa"),
            M=int(doc.get("M", 64)),
            name=str(doc.get("name", "custom")),
        )
    except KeyError as exc:
        raise ValueError(f"profile document is missing field {exc}") from None
