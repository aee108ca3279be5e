"""Laplace transforms of the escape probability.

``phi1(y)`` and ``phi2(x)`` transform the escape probability started on the
vertical and horizontal axes; ``phi(x, y)`` is the bivariate transform.
For ``alpha = d - 1 + r*pi/beta`` we have ``phi1 = S(w(y)) / Q(y)`` where ``w``
is the conformal gluing function and ``S`` a rational correction built from
the points of the orbit ``y(s1 q^k)`` lying in the closed domain bounded by
the hyperbola H.  When ``alpha`` is an integer ``S = 1`` and
``phi = L / (P Q)`` with ``L`` a polynomial.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .config import DEFAULT, Tolerances
from .decoupling import DecouplingPair, decoupling_pair, eval_P, eval_Q
from .errors import CardinalityError, DivisionResidualError, PoleError, WedgeAbsorbError
from .kernel import K, KernelGeometry, k1, k2, special_points, ux, uy
from .model import QuadrantModel, WedgeModel, find_dr

__all__ = [
    "GluingFunction",
    "CorrectionS",
    "LPolynomial",
    "LaplaceSolution",
    "w_eval",
    "gluing_function",
    "build_S",
    "phi1",
    "phi2",
    "build_L",
    "phi_full",
    "boundary_factor",
    "bvp_boundary_check",
    "boundary_pole_status",
    "swap_model",
    "laplace_solution",
]


@dataclass(frozen=True)
class GluingFunction:
    yplus: float
    yminus: float
    pi_over_beta: float

    def __call__(self, y):
        return w_eval(self, y)


def w_eval(g: GluingFunction, y):
    """``cos((pi/beta) arccos(z))`` with ``z = (2y - (y+ + y-)) / (y+ - y-)``.

    The principal complex branch of arccos is used everywhere.
    """
    z = (2 * np.asarray(y, dtype=complex) - (g.yplus + g.yminus)) / (g.yplus - g.yminus)
    return np.cos(g.pi_over_beta * np.arccos(z))


def gluing_function(geom: KernelGeometry) -> GluingFunction:
    return GluingFunction(geom.yplus, geom.yminus, math.pi / geom.wedge.beta)


ZEROS = "zeros"
POLES = "poles"


@dataclass(frozen=True)
class CorrectionS:
    """Rational function ``S`` of degree ``-r`` in the gluing variable.

    ``points`` are the y-values of the set Z (``mode == "zeros"``, d >= 2) or
    P (``mode == "poles"``, d <= 0); ``ks`` the orbit indices they come from.
    """

    mode: str
    points: tuple
    ks: tuple
    w0: complex
    wpoints: tuple

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for wp in self.wpoints:
            if self.mode == ZEROS:
                out = out * (z - wp) / (self.w0 - wp)
            else:
                out = out * (self.w0 - wp) / (z - wp)
        return out

    @property
    def degree(self) -> int:
        return len(self.points) if self.mode == ZEROS else -len(self.points)


def _in_closed_domain(s: complex, beta: float, tol: float) -> bool:
    """``arg(s) in [0, 2 beta]`` modulo ``2 pi``: the unit-circle part of ``y^{-1}`` of the closed domain."""
    a = cmath.phase(s) % (2 * math.pi)
    if a > 2 * math.pi - tol:
        a -= 2 * math.pi
    return -tol <= a <= 2 * beta + tol


def build_S(geom: KernelGeometry, pair: DecouplingPair, tol: Tolerances = DEFAULT) -> CorrectionS:
    beta = geom.wedge.beta
    q, s1 = geom.q, geom.s1
    if pair.d >= 2:
        mode = ZEROS
        orbit = [(k, s1 / q**k) for k in range(1, pair.d - 1)]
        expected = -pair.r
    else:
        mode = POLES
        orbit = [(k, s1 * q**k) for k in range(0, 2 - pair.d)]
        expected = pair.r
    picked = [(k, s) for k, s in orbit if _in_closed_domain(s, beta, tol.angle)]
    if len(picked) != expected:
        raise CardinalityError(f"found {len(picked)} orbit points in the closed domain, expected {expected}")
    g = gluing_function(geom)
    ys = tuple(float(complex(uy(geom, s)).real) for _, s in picked)
    w0 = complex(w_eval(g, 0.0))
    wp = tuple(complex(w_eval(g, y)) for y in ys)
    return CorrectionS(mode, ys, tuple(k for k, _ in picked), w0, wp)


def phi1(g: GluingFunction, pair: DecouplingPair, S: CorrectionS, y):
    """Laplace transform of ``1 - f(0, v)``."""
    y = np.asarray(y, dtype=complex)
    Qy = eval_Q(pair, y)
    if np.any(Qy == 0):
        raise PoleError("phi1 evaluated at a zero of Q")
    return S(w_eval(g, y)) / Qy


def swap_model(m: QuadrantModel) -> QuadrantModel:
    """Exchange the two coordinates of the quadrant."""
    return QuadrantModel(m.sigma22, m.sigma12, m.sigma11, m.mu2, m.mu1, m.r2, m.r1)


def boundary_pole_status(w: WedgeModel, tol: float = DEFAULT.angle) -> str:
    """Whether ``y(s1)`` is a pole of ``phi1`` in the closed domain: ``2 eps + theta >= 2 pi``.

    Equality is reported as ``"boundary"`` and treated as pole-present.
    """
    gap = 2 * w.epsilon + w.theta - 2 * math.pi
    if abs(gap) <= tol:
        return "boundary"
    return "present" if gap > 0 else "absent"


@dataclass(frozen=True)
class LPolynomial:
    """Real bivariate polynomial, ``coeffs[i, j]`` multiplies ``x**i * y**j``."""

    coeffs: np.ndarray
    residual: float
    max_imag: float

    def __call__(self, x, y):
        return npoly.polyval2d(np.asarray(x, dtype=complex), np.asarray(y, dtype=complex), self.coeffs)


def _numerator(m, pair, x, y):
    return k1(m, x, y) * eval_P(pair, x) + k2(m, x, y) * eval_Q(pair, y)


def build_L(m: QuadrantModel, pair: DecouplingPair, tol: Tolerances = DEFAULT) -> LPolynomial:
    """Polynomial ``L = (k1 P + k2 Q) / K``, found by least squares on a complex torus.

    The fit is certified by the residual of ``k1 P + k2 Q - L K`` on a separate
    20 x 20 real grid.
    """
    if not pair.is_polynomial:
        raise ValueError("L is only a polynomial for d >= 2")
    deg = pair.d - 1
    idx = [(i, j) for i in range(deg + 1) for j in range(deg + 1 - i)]
    rx = 1.0 + max(abs(v) for v in pair.proots)
    ry = 1.0 + max(abs(v) for v in pair.qroots)
    n = deg + 4
    ang = 2 * np.pi * (np.arange(n) + 0.25) / n
    X, Y = np.meshgrid(rx * np.exp(1j * ang), ry * np.exp(1j * 1.37 * ang), indexing="ij")
    X, Y = X.ravel(), Y.ravel()
    kv = K(m, X, Y)
    A = np.stack([kv * (X / rx) ** i * (Y / ry) ** j for i, j in idx], axis=1)
    sol, *_ = np.linalg.lstsq(A, _numerator(m, pair, X, Y), rcond=None)
    coeffs = np.zeros((deg + 1, deg + 1), dtype=complex)
    for (i, j), c in zip(idx, sol):
        coeffs[i, j] = c / (rx**i * ry**j)
    max_imag = float(np.max(np.abs(coeffs.imag)) / max(1.0, np.max(np.abs(coeffs))))
    if max_imag > tol.coefficient_imag:
        raise DivisionResidualError(f"L has non-real coefficients (imag {max_imag:.3g})")
    L = LPolynomial(coeffs.real.copy(), 0.0, max_imag)
    res = l_residual(m, pair, L, rx, ry)
    if res > tol.residual:
        raise DivisionResidualError(f"k1 P + k2 Q is not divisible by K (residual {res:.3g})")
    return LPolynomial(L.coeffs, res, max_imag)


def l_residual(m, pair, L, rx, ry, n=20) -> float:
    """Scaled max of ``|k1 P + k2 Q - L K|`` over an ``n x n`` real grid."""
    X, Y = np.meshgrid(np.linspace(-rx, rx, n), np.linspace(-ry, ry, n), indexing="ij")
    num = _numerator(m, pair, X, Y)
    lk = L(X, Y) * K(m, X, Y)
    scale = np.max(np.abs(k1(m, X, Y) * eval_P(pair, X)) + np.abs(k2(m, X, Y) * eval_Q(pair, Y)))
    return float(np.max(np.abs(num - lk)) / scale)


def phi_full(m: QuadrantModel, pair: DecouplingPair, L: LPolynomial, x, y):
    """Bivariate transform ``L / (P Q)`` (integer alpha)."""
    den = eval_P(pair, x) * eval_Q(pair, y)
    if np.any(den == 0):
        raise PoleError("phi evaluated on a zero of P Q")
    return L(x, y) / den


def phi2(m: QuadrantModel, x, d: Optional[int] = None, r: Optional[int] = None):
    """Laplace transform of ``1 - f(u, 0)``, via the coordinate swap."""
    return laplace_solution(swap_model(m), d, r).phi1(x)


def boundary_factor(m: QuadrantModel, x, y, ybar):
    """The Carleman coefficient ``G`` of the boundary relation ``phi1(ybar) = G phi1(y)``."""
    return k1(m, x, y) / k2(m, x, y) * k2(m, x, ybar) / k1(m, x, ybar)


class LaplaceSolution:
    """All Laplace-side objects for one model and one representation ``(d, r)``."""

    def __init__(self, m: QuadrantModel, d: Optional[int] = None, r: Optional[int] = None, tol: Tolerances = DEFAULT):
        self.model = m
        self.tol = tol
        self.geom = special_points(m, tol)
        w = self.geom.wedge
        if d is None:
            dr = find_dr(w.alpha, w.beta, tol.integer)
            if dr is None:
                raise WedgeAbsorbError(f"alpha={w.alpha!r} admits no decoupling: no closed form")
            d, r = dr
        self.pair = decoupling_pair(self.geom, d, r, tol)
        self.gluing = gluing_function(self.geom)
        self.S = build_S(self.geom, self.pair, tol)
        self._L = None
        self._swapped = None

    @property
    def d(self):
        return self.pair.d

    @property
    def r(self):
        return self.pair.r

    @property
    def alpha(self):
        return self.geom.wedge.alpha

    def phi1(self, y):
        return phi1(self.gluing, self.pair, self.S, y)

    def phi2(self, x):
        if self._swapped is None:
            self._swapped = LaplaceSolution(swap_model(self.model), self.d, self.r, self.tol)
        return self._swapped.phi1(x)

    @property
    def L(self) -> LPolynomial:
        if self._L is None:
            self._L = build_L(self.model, self.pair, self.tol)
        return self._L

    def phi(self, x, y):
        """Bivariate transform; ``L/(PQ)`` when alpha is an integer, else from the functional equation."""
        m = self.model
        if self.pair.is_polynomial and self.r == 0:
            return phi_full(m, self.pair, self.L, x, y)
        x = np.asarray(x, dtype=complex)
        y = np.asarray(y, dtype=complex)
        return (k1(m, x, y) * self.phi1(y) + k2(m, x, y) * self.phi2(x)) / K(m, x, y)

    def bvp_residual(self, t):
        return bvp_boundary_check(self, t)


def laplace_solution(m: QuadrantModel, d=None, r=None, tol: Tolerances = DEFAULT) -> LaplaceSolution:
    return LaplaceSolution(m, d, r, tol)


def bvp_boundary_check(sol: LaplaceSolution, t):
    """``|phi1(ybar) - G(y) phi1(y)|`` at ``y = y(t)`` on H, ``t > 0``.

    ``X+(y(t))`` is the real point ``x(t) >= x+``; ``ybar = y(q t)``.
    """
    t = np.asarray(t, dtype=float)
    geom = sol.geom
    x = ux(geom, t)
    y = uy(geom, t)
    ybar = uy(geom, geom.q * t)
    G = boundary_factor(sol.model, x, y, ybar)
    return np.abs(sol.phi1(ybar) - G * sol.phi1(y))
