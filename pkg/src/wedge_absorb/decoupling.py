"""Decoupling pairs ``(P, Q)`` with ``k2/k1 = lambda * P(x)/Q(y)`` on the kernel curve.

``P`` and ``Q`` are stored as root (or pole) lists with the normalisation
``P(0) = Q(0) = 0`` and ``P'(0) = Q'(0) = 1``; they are never expanded.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import DegreeOneError, MultipleRootError, PoleError, WedgeAbsorbError
from .kernel import KernelGeometry, k1, k2, uniform_xy, ux, uy
from .model import WedgeModel

__all__ = [
    "DecouplingPair",
    "decoupling_pair",
    "simple_root_check",
    "near_resonance",
    "simple_root_range",
    "eval_P",
    "eval_Q",
    "root_derivatives",
    "lambda_product",
]

POLYNOMIAL = "polynomial"
RATIONAL = "rational"


@dataclass(frozen=True)
class DecouplingPair:
    """``proots``/``qroots`` start with the zero at the origin; the remaining
    entries are roots (``mode == "polynomial"``, d >= 2) or poles
    (``mode == "rational"``, d <= 0)."""

    d: int
    r: int
    mode: str
    proots: tuple
    qroots: tuple
    lam: float
    max_imag: float = 0.0
    near_resonance: Optional[int] = None

    @property
    def is_polynomial(self) -> bool:
        return self.mode == POLYNOMIAL

    def P(self, x):
        return eval_P(self, x)

    def Q(self, y):
        return eval_Q(self, y)

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "r": self.r,
            "mode": self.mode,
            "proots": list(self.proots),
            "qroots": list(self.qroots),
            "lambda": self.lam,
        }


def simple_root_range(d: int):
    if d >= 2:
        return range(1, 2 * d - 3)
    if d <= 0:
        return range(2 * d - 1, -1)
    raise DegreeOneError("d = 1 admits no decoupling pair")


def _sin_resonance(w: WedgeModel, j: int) -> float:
    return abs(math.sin(w.theta - 2 * w.delta + j * w.beta))


def simple_root_check(w: WedgeModel, d: int, tol: Tolerances = DEFAULT) -> Optional[int]:
    """First ``j`` with ``theta - 2 delta + j beta = 0 mod pi``, or ``None`` when roots are simple."""
    for j in simple_root_range(d):
        if _sin_resonance(w, j) < tol.simple_root:
            return j
    return None


def near_resonance(w: WedgeModel, d: int, tol: Tolerances = DEFAULT) -> Optional[int]:
    for j in simple_root_range(d):
        if _sin_resonance(w, j) < tol.simple_root_warn:
            return j
    return None


def _real_roots(values, tol):
    values = np.asarray(values, dtype=complex)
    scale = np.maximum(1.0, np.abs(values))
    imag = float(np.max(np.abs(values.imag) / scale)) if values.size else 0.0
    if imag > tol.imag_drop:
        raise WedgeAbsorbError(f"decoupling roots are not real (imaginary residue {imag:.3g})")
    return [float(v) for v in values.real], imag


def _check_distinct(roots, tol):
    pts = [0.0] + list(roots)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if abs(pts[i] - pts[j]) < tol.simple_root * max(1.0, abs(pts[i])):
                raise MultipleRootError(None, f"coincident roots/poles {pts[i]!r} and {pts[j]!r}")


def _product(mode, roots, z):
    z = np.asarray(z, dtype=complex)
    out = z.copy()
    for rho in roots:
        if mode == POLYNOMIAL:
            out = out * (z - rho) / (-rho)
        else:
            if np.any(np.abs(z - rho) < DEFAULT.pole * max(1.0, abs(rho))):
                raise PoleError(f"evaluation at pole {rho!r}")
            out = out * (-rho) / (z - rho)
    return out


def eval_P(pair: DecouplingPair, x):
    return _product(pair.mode, pair.proots[1:], x)


def eval_Q(pair: DecouplingPair, y):
    return _product(pair.mode, pair.qroots[1:], y)


def root_derivatives(roots):
    """``P'(rho)`` at each entry of ``roots`` for ``P(x) = x prod (x - rho)/(-rho)``;
    ``roots`` lists the nonzero roots."""
    roots = list(roots)
    norm = np.prod([-rho for rho in roots])
    out = []
    for i, ri in enumerate(roots):
        others = [ri] + [ri - rk for k, rk in enumerate(roots) if k != i]
        out.append(float(np.prod(others) / norm))
    return out


def lambda_product(geom: KernelGeometry, pair: DecouplingPair) -> complex:
    """Closed-form decoupling constant for ``d >= 2`` (independent of the identity evaluation)."""
    if not pair.is_polynomial:
        raise ValueError("product formula only for polynomial pairs")
    hx = 0.25 * (geom.xplus - geom.xminus)
    hy = 0.25 * (geom.yplus - geom.yminus)
    ratio = np.prod([a / b for a, b in zip(pair.proots[1:], pair.qroots[1:])])
    return geom.C2 / geom.C1 * (hy / (hx * geom.eib)) ** pair.d * ratio


def decoupling_pair(geom: KernelGeometry, d: int, r: int, tol: Tolerances = DEFAULT) -> DecouplingPair:
    """Construct the decoupling pair for ``alpha = d - 1 + r*pi/beta``."""
    w = geom.wedge
    if d == 1:
        raise DegreeOneError("d = 1 admits no decoupling pair")
    if abs(w.alpha - (d - 1) - r * math.pi / w.beta) > 1e3 * tol.integer:
        raise ValueError(f"(d, r) = ({d}, {r}) does not represent alpha = {w.alpha!r}")
    j = simple_root_check(w, d, tol)
    if j is not None:
        raise MultipleRootError(j)
    warn_j = near_resonance(w, d, tol)
    if warn_j is not None:
        warnings.warn(f"near-resonant simple-root condition at j={warn_j}", RuntimeWarning, stacklevel=2)

    q, s1, s2 = geom.q, geom.s1, geom.s2
    if d >= 2:
        mode = POLYNOMIAL
        px = [ux(geom, s2 * q**k) for k in range(d - 1)]
        qy = [uy(geom, s1 / q**k) for k in range(d - 1)]
    else:
        mode = RATIONAL
        px = [ux(geom, s2 / q**k) for k in range(1, 2 - d)]
        qy = [uy(geom, s1 * q**k) for k in range(1, 2 - d)]
    pr, im1 = _real_roots(px, tol)
    qr, im2 = _real_roots(qy, tol)
    _check_distinct(pr, tol)
    _check_distinct(qr, tol)

    pair = DecouplingPair(d, r, mode, tuple([0.0] + pr), tuple([0.0] + qr), 0.0, max(im1, im2), warn_j)
    x, y = uniform_xy(geom, 2.0)
    m = geom.model
    lam = complex(k2(m, x, y) * eval_Q(pair, y) / (k1(m, x, y) * eval_P(pair, x)))
    if abs(lam.imag) > 1e-8 * max(1.0, abs(lam)):
        raise WedgeAbsorbError(f"decoupling constant is not real: {lam}")
    return DecouplingPair(d, r, mode, pair.proots, pair.qroots, lam.real, pair.max_imag, warn_j)
