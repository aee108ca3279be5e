"""The kernel curve ``K(x, y) = 0`` and its rational uniformisation.

All functions accept scalars or numpy arrays (real or complex) and broadcast.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import WedgeAbsorbError
from .model import QuadrantModel, WedgeModel, quadrant_to_wedge, wedge_to_quadrant

__all__ = [
    "K",
    "k1",
    "k2",
    "k1star",
    "k2star",
    "branch_points",
    "Y_branches",
    "X_branches",
    "KernelGeometry",
    "special_points",
    "uniform_xy",
    "ux",
    "uy",
    "hyperbola_sample",
    "discriminant",
]


def K(m: QuadrantModel, x, y):
    return 0.5 * (m.sigma11 * x * x + m.sigma22 * y * y + 2 * m.sigma12 * x * y) + m.mu1 * x + m.mu2 * y


def k1(m: QuadrantModel, x, y):
    return 0.5 * m.sigma11 * (x + m.r1 * y) + m.sigma12 * y + m.mu1


def k2(m: QuadrantModel, x, y):
    return 0.5 * m.sigma22 * (m.r2 * x + y) + m.sigma12 * x + m.mu2


def k1star(m: QuadrantModel, x, y):
    """``(x, y) . R^1``; the oblique derivative on ``u = 0`` of ``exp(xu + yv)``."""
    return x - m.r1 * y


def k2star(m: QuadrantModel, x, y):
    return -m.r2 * x + y


def discriminant(m: QuadrantModel) -> float:
    """Discriminant under the square root of the branch points; positive iff K is irreducible."""
    return (m.mu2 * m.sigma12 - m.mu1 * m.sigma22) ** 2 + m.det * m.mu2**2


def branch_points(m: QuadrantModel):
    """``(x+, x-, y+, y-)``: ramification points of the two-valued branches."""
    bx = m.mu2 * m.sigma12 - m.mu1 * m.sigma22
    rx = math.sqrt(bx * bx + m.det * m.mu2**2)
    by = m.mu1 * m.sigma12 - m.mu2 * m.sigma11
    ry = math.sqrt(by * by + m.det * m.mu1**2)
    return (bx + rx) / m.det, (bx - rx) / m.det, (by + ry) / m.det, (by - ry) / m.det


def Y_branches(m: QuadrantModel, x):
    """Roots ``(Y+, Y-)`` of ``K(x, .)``, principal square root."""
    x = np.asarray(x, dtype=complex)
    b = m.sigma12 * x + m.mu2
    root = np.sqrt(b * b - m.sigma22 * (m.sigma11 * x * x + 2 * m.mu1 * x))
    return (-b + root) / m.sigma22, (-b - root) / m.sigma22


def X_branches(m: QuadrantModel, y):
    y = np.asarray(y, dtype=complex)
    b = m.sigma12 * y + m.mu1
    root = np.sqrt(b * b - m.sigma11 * (m.sigma22 * y * y + 2 * m.mu2 * y))
    return (-b + root) / m.sigma11, (-b - root) / m.sigma11


def _unit(z: complex) -> complex:
    return z / abs(z)


@dataclass(frozen=True)
class KernelGeometry:
    """Branch points, rotation ``q = exp(2i beta)`` and the special points of
    the uniformisation at which ``k1, k2, k1*, k2*`` vanish."""

    model: QuadrantModel
    wedge: WedgeModel
    xplus: float
    xminus: float
    yplus: float
    yminus: float
    q: complex
    s0p: complex
    s0pp: complex
    s1: complex
    s2: complex
    s0star: complex
    s1star: complex
    s2star: complex
    C1: complex
    C2: complex
    C1star: complex
    C2star: complex

    @property
    def eib(self) -> complex:
        return cmath.exp(1j * self.wedge.beta)

    def x(self, s):
        return ux(self, s)

    def y(self, s):
        return uy(self, s)

    def as_dict(self) -> dict:
        def c(z):
            return [z.real, z.imag]

        return {
            "xplus": self.xplus,
            "xminus": self.xminus,
            "yplus": self.yplus,
            "yminus": self.yminus,
            "q": c(self.q),
            "s0p": c(self.s0p),
            "s0pp": c(self.s0pp),
            "s1": c(self.s1),
            "s2": c(self.s2),
            "s0star": c(self.s0star),
            "s1star": c(self.s1star),
            "s2star": c(self.s2star),
            "C1": c(self.C1),
            "C2": c(self.C2),
            "C1star": c(self.C1star),
            "C2star": c(self.C2star),
        }


def _center_halfwidth(plus, minus):
    return 0.5 * (plus + minus), 0.25 * (plus - minus)


def ux(geom: KernelGeometry, s):
    s = np.asarray(s, dtype=complex)
    if np.any(s == 0):
        raise ValueError("uniformisation parameter s must be nonzero")
    c, h = _center_halfwidth(geom.xplus, geom.xminus)
    return c + h * (s + 1 / s)


def uy(geom: KernelGeometry, s):
    s = np.asarray(s, dtype=complex)
    if np.any(s == 0):
        raise ValueError("uniformisation parameter s must be nonzero")
    c, h = _center_halfwidth(geom.yplus, geom.yminus)
    e = geom.eib
    return c + h * (s / e + e / s)


def uniform_xy(geom: KernelGeometry, s):
    """Point ``(x(s), y(s))`` of the curve ``K = 0``."""
    return ux(geom, s), uy(geom, s)


def _fit_constant(form, geom, a, b, tol):
    """Constant ``C`` with ``form(x(s), y(s)) = C (s-a)(s-b)/s``, fitted at s=2 and checked at s=3."""

    def ratio(s):
        x, y = uniform_xy(geom, s)
        return complex(form(geom.model, x, y) * s / ((s - a) * (s - b)))

    c2, c3 = ratio(2.0), ratio(3.0)
    if abs(c2 - c3) > 1e-9 * max(abs(c2), 1e-300):
        raise WedgeAbsorbError(f"factorisation of k-form failed: C(2)={c2}, C(3)={c3}")
    return c2


def special_points(m, tol: Tolerances = DEFAULT) -> KernelGeometry:
    """Build the :class:`KernelGeometry` of a model.

    ``m`` is a :class:`QuadrantModel`; a :class:`WedgeModel` is first mapped to
    its canonical quadrant form with unit drift.
    """
    if isinstance(m, WedgeModel):
        w, m = m, wedge_to_quadrant(m)
    else:
        w = quadrant_to_wedge(m, tol)
    xp, xm, yp, ym = branch_points(m)
    b, t, dl, ep = w.beta, w.theta, w.delta, w.epsilon
    q = _unit(cmath.exp(2j * b))
    s0p = _unit(cmath.exp(1j * (2 * b - t)))
    s0pp = _unit(cmath.exp(-1j * t))
    s1 = _unit(cmath.exp(1j * (t + 2 * ep)))
    s2 = _unit(cmath.exp(1j * (t - 2 * dl)))
    s0star = _unit(1 / s0pp)
    s1star = _unit(q / s1)
    s2star = _unit(1 / s2)
    geom = KernelGeometry(m, w, xp, xm, yp, ym, q, s0p, s0pp, s1, s2, s0star, s1star, s2star, 0j, 0j, 0j, 0j)
    consts = dict(
        C1=_fit_constant(k1, geom, s0p, s1, tol),
        C2=_fit_constant(k2, geom, s0pp, s2, tol),
        C1star=_fit_constant(k1star, geom, s0star, s1star, tol),
        C2star=_fit_constant(k2star, geom, s0star, s2star, tol),
    )
    return KernelGeometry(**{**geom.__dict__, **consts})


def hyperbola_sample(geom: KernelGeometry, t):
    """Point ``y(t)`` on the hyperbola H for ``t > 0``; its conjugate is ``y(q t)``."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("hyperbola parameter must be positive")
    return uy(geom, t)
