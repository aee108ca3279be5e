"""Absorption probability as a finite sum of exponentials (integer alpha).

The exponents ``(a_k, b_k)`` form a zig-zag chain on the real ellipse
``K = 0`` that starts on the line ``k1* = 0`` and ends on ``k2* = 0``;
consecutive terms share either ``a`` or ``b`` and their coefficients cancel
the oblique derivative on the corresponding axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .decoupling import DecouplingPair, root_derivatives, simple_root_check
from .errors import (
    ChainDegenerateError,
    DegenerateReflectionError,
    DoubleRootNotImplemented,
    MultipleRootError,
    NotSumOfExponentials,
    ResonanceMismatchError,
    WedgeAbsorbError,
    ZeroDenominatorError,
)
from .kernel import K, KernelGeometry, k1star, k2star, special_points, ux, uy
from .model import QuadrantModel

__all__ = [
    "ExponentialSum",
    "AffineExponentialSum",
    "ab_chain",
    "c_coefficients",
    "exponential_sum",
    "absorption_probability",
    "absorption_function",
    "boundary_marginals",
    "collect_rates",
    "double_root_sum",
    "double_root_alpha2",
    "residual_suite",
    "integer_alpha",
]


@dataclass(frozen=True)
class ExponentialSum:
    """``f(u, v) = sum_k c_k exp(a_k u + b_k v)``."""

    terms: tuple  # of (a, b, c)

    def __call__(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        out = np.zeros(np.broadcast(u, v).shape)
        for a, b, c in self.terms:
            out = out + c * np.exp(a * u + b * v)
        return out

    @property
    def a(self):
        return [t[0] for t in self.terms]

    @property
    def b(self):
        return [t[1] for t in self.terms]

    @property
    def c(self):
        return [t[2] for t in self.terms]

    def derivatives(self, u, v):
        """``f, f_u, f_v, f_uu, f_uv, f_vv`` evaluated exactly."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        out = [np.zeros(np.broadcast(u, v).shape) for _ in range(6)]
        for a, b, c in self.terms:
            e = c * np.exp(a * u + b * v)
            for i, fac in enumerate((1.0, a, b, a * a, a * b, b * b)):
                out[i] = out[i] + fac * e
        return out

    def laplace(self, x, y):
        """Double Laplace transform of ``1 - f``."""
        out = 1.0 / (x * y)
        for a, b, c in self.terms:
            out = out - c / ((x - a) * (y - b))
        return out


@dataclass(frozen=True)
class AffineExponentialSum:
    """``f(u, v) = sum (p + qu*u + qv*v) exp(a u + b v)``; arises when the
    decoupling polynomials have a double root."""

    terms: tuple  # of (p, qu, qv, a, b)

    def __call__(self, u, v):
        return self.derivatives(u, v)[0]

    def derivatives(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        out = [np.zeros(np.broadcast(u, v).shape) for _ in range(6)]
        for p, qu, qv, a, b in self.terms:
            e = np.exp(a * u + b * v)
            t = (p + qu * u + qv * v) * e
            out[0] = out[0] + t
            out[1] = out[1] + qu * e + a * t
            out[2] = out[2] + qv * e + b * t
            out[3] = out[3] + 2 * a * qu * e + a * a * t
            out[4] = out[4] + (a * qv + b * qu) * e + a * b * t
            out[5] = out[5] + 2 * b * qv * e + b * b * t
        return out


def integer_alpha(m: QuadrantModel, tol: Tolerances = DEFAULT) -> int:
    alpha = m.wedge(tol).alpha
    n = round(alpha)
    if n < 1 or abs(alpha - n) > tol.integer:
        raise NotSumOfExponentials(f"alpha={alpha!r} is not a positive integer: no sum-of-exponentials form")
    return n


def ab_chain(m: QuadrantModel, alpha: int, geom: KernelGeometry = None, tol: Tolerances = DEFAULT):
    """Exponents ``(a_k, b_k)``, ``k = 1 .. 2 alpha - 1``, by Vieta steps along the ellipse.

    The terminal point is checked against its closed form and, when ``geom`` is
    given, every point against the uniformisation ``(x(s1/q^ceil(k/2)), y(s1/q^floor(k/2)))``.
    """
    s11, s12, s22 = m.sigma11, m.sigma12, m.sigma22
    b = -2 * (m.r1 * m.mu1 + m.mu2) / (s22 + s11 * m.r1**2 + 2 * s12 * m.r1)
    a = m.r1 * b
    chain = [(a, b)]
    for k in range(2, 2 * alpha):
        if abs(a) < tol.chain_zero or abs(b) < tol.chain_zero:
            raise ChainDegenerateError(f"chain point {k - 1} touches an axis: ({a!r}, {b!r})")
        if k % 2 == 0:
            b = (a / b) * (s11 * a + 2 * m.mu1) / s22
        else:
            a = (b / a) * (s22 * b + 2 * m.mu2) / s11
        chain.append((a, b))
    for k, (a, b) in enumerate(chain, 1):
        if abs(a) < tol.chain_zero or abs(b) < tol.chain_zero:
            raise ChainDegenerateError(f"chain point {k} touches an axis: ({a!r}, {b!r})")

    a_end = -2 * (m.mu1 + m.r2 * m.mu2) / (s11 + s22 * m.r2**2 + 2 * s12 * m.r2)
    a_last, b_last = chain[-1]
    if abs(a_last - a_end) > 1e-9 * max(1.0, abs(a_end)) or abs(b_last - m.r2 * a_end) > 1e-9 * max(1.0, abs(a_end)):
        raise WedgeAbsorbError(
            f"chain does not close on k2* = 0: got {chain[-1]}, expected {(a_end, m.r2 * a_end)}"
        )
    if geom is not None:
        for k, (a, b) in enumerate(chain, 1):
            xa = complex(ux(geom, geom.s1 / geom.q ** math.ceil(k / 2)))
            yb = complex(uy(geom, geom.s1 / geom.q ** (k // 2)))
            if abs(xa - a) > 1e-8 * max(1.0, abs(a)) or abs(yb - b) > 1e-8 * max(1.0, abs(b)):
                raise WedgeAbsorbError(f"chain point {k} disagrees with the uniformisation: {(a, b)} vs {(xa, yb)}")
    return chain


def c_coefficients(m: QuadrantModel, chain, tol: Tolerances = DEFAULT):
    """Compensation coefficients, seeded at ``c_1 = 1`` and rescaled to sum to one."""
    c = [1.0]
    for k in range(2, len(chain) + 1):
        form = k2star if k % 2 == 0 else k1star
        num = form(m, *chain[k - 2])
        den = form(m, *chain[k - 1])
        if abs(den) < tol.chain_zero * max(1.0, abs(num)):
            raise ZeroDenominatorError(k)
        c.append(-c[-1] * num / den)
    total = math.fsum(c)
    if total == 0:
        raise ZeroDenominatorError(0, "coefficients sum to zero; cannot normalise")
    return [x / total for x in c]


def exponential_sum(m: QuadrantModel, tol: Tolerances = DEFAULT) -> ExponentialSum:
    """Sum-of-exponentials absorption probability.

    Raises :class:`NotSumOfExponentials` unless alpha is a positive integer, and
    :class:`MultipleRootError` when the simple-root condition fails.
    """
    n = integer_alpha(m, tol)
    w = m.wedge(tol)
    j = simple_root_check(w, n + 1, tol)
    if j is not None:
        raise MultipleRootError(j)
    geom = special_points(m, tol)
    chain = ab_chain(m, n, geom, tol)
    c = c_coefficients(m, chain, tol)
    return ExponentialSum(tuple((a, b, ck) for (a, b), ck in zip(chain, c)))


def absorption_probability(es, u, v):
    """``P_(u,v)(T < inf)`` for an exponential (or affine-exponential) sum."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u < 0) or np.any(v < 0):
        raise ValueError("starting point must lie in the closed quadrant")
    return es(u, v)


def absorption_function(m: QuadrantModel, tol: Tolerances = DEFAULT):
    """Dispatch between the simple-root sum and the alpha = 2 double-root formula."""
    try:
        return exponential_sum(m, tol)
    except MultipleRootError as err:
        n = integer_alpha(m, tol)
        if n == 2:
            return double_root_sum(m, tol=tol)
        raise DoubleRootNotImplemented(err.j, n) from err


def collect_rates(pairs, tol: float = DEFAULT.rate_merge):
    """Merge ``(rate, weight)`` pairs whose rates agree within ``tol``."""
    out = []
    for rate, weight in sorted(pairs, key=lambda p: p[0]):
        if out and abs(out[-1][0] - rate) <= tol:
            out[-1] = (out[-1][0], out[-1][1] + weight)
        else:
            out.append((rate, weight))
    return out


def boundary_marginals(pair: DecouplingPair, geom: KernelGeometry = None):
    """One-dimensional expansions ``f(u, 0) = sum d_i e^{x_i u}``, ``f(0, v) = sum e_j e^{y_j v}``.

    The weights are ``-1/P'`` and ``-1/Q'`` at the nonzero roots.
    """
    if not pair.is_polynomial or pair.r != 0:
        raise NotSumOfExponentials("boundary marginals need integer alpha")
    xs, ys = pair.proots[1:], pair.qroots[1:]
    dw = [-1.0 / p for p in root_derivatives(xs)]
    ew = [-1.0 / p for p in root_derivatives(ys)]
    return list(zip(xs, dw)), list(zip(ys, ew))


def _resonance(m: QuadrantModel, tol: Tolerances):
    w = m.wedge(tol)
    g1 = w.theta - 2 * w.delta + w.beta + math.pi
    g2 = w.theta - 2 * w.delta + 2 * w.beta + math.pi
    return w, g1, g2


def double_root_sum(m: QuadrantModel, which: str = None, tol: Tolerances = DEFAULT) -> AffineExponentialSum:
    """Affine-exponential absorption probability for alpha = 2 with a double root.

    ``which="case1"``: ``theta - 2 delta + beta = -pi`` (double root of P);
    ``which="case2"``: ``theta - 2 delta + 2 beta = -pi`` (double root of Q).
    Detected automatically when ``which`` is None.
    """
    if integer_alpha(m, tol) != 2:
        raise ResonanceMismatchError("double-root formula only for alpha = 2")
    w, g1, g2 = _resonance(m, tol)
    hit1, hit2 = abs(g1) < tol.simple_root, abs(g2) < tol.simple_root
    if which is None:
        which = "case1" if hit1 else "case2" if hit2 else None
    if which not in ("case1", "case2") or (which == "case1" and not hit1) or (which == "case2" and not hit2):
        raise ResonanceMismatchError(f"resonance {which!r} does not hold (gaps {g1:.3g}, {g2:.3g})")
    if abs(m.r1 * m.r2 - 1) < 1e-12:
        raise DegenerateReflectionError("r1 r2 = 1")
    c = 1.0 / (m.r1 * m.r2 - 1)
    geom = special_points(m, tol)
    s1, s2, q = geom.s1, geom.s2, geom.q
    xs2 = complex(ux(geom, s2)).real
    ys1 = complex(uy(geom, s1)).real
    if which == "case1":
        ys1q = complex(uy(geom, s1 / q)).real
        terms = ((1 + c, 0.0, 0.0, xs2, ys1), (-c, -xs2, 0.0, xs2, ys1q))
    else:
        xs2q = complex(ux(geom, s2 * q)).real
        # the v-weighted term sits at the x-branch point x(s2 q) = x-
        terms = ((-c, 0.0, -ys1, xs2q, ys1), (1 + c, 0.0, 0.0, xs2, ys1))
    return AffineExponentialSum(terms)


def double_root_alpha2(m: QuadrantModel, which: str, u, v, tol: Tolerances = DEFAULT):
    return double_root_sum(m, which, tol)(u, v)


def residual_suite(f, m: QuadrantModel, grid):
    """Max residuals ``(G f, d_{R1} f on u=0, d_{R2} f on v=0)`` over ``grid``.

    ``f`` must provide exact ``derivatives(u, v)``. ``grid`` is a 1-D array of
    coordinates; the PDE is checked on its square, the boundary forms on each axis.
    """
    g = np.asarray(grid, dtype=float)
    U, V = np.meshgrid(g, g, indexing="ij")
    _, fu, fv, fuu, fuv, fvv = f.derivatives(U, V)
    pde = 0.5 * (m.sigma11 * fuu + 2 * m.sigma12 * fuv + m.sigma22 * fvv) + m.mu1 * fu + m.mu2 * fv
    _, fu, fv, *_ = f.derivatives(np.zeros_like(g), g)
    n1 = fu - m.r1 * fv
    _, fu, fv, *_ = f.derivatives(g, np.zeros_like(g))
    n2 = -m.r2 * fu + fv
    return float(np.max(np.abs(pde))), float(np.max(np.abs(n1))), float(np.max(np.abs(n2)))
