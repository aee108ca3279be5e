"""Parameterisations of the reflected Brownian motion and the alpha classification.

Two equivalent descriptions are used throughout:

* :class:`QuadrantModel` -- covariance ``Sigma``, drift ``mu`` and reflection
  matrix ``R = [[1, -r2], [-r1, 1]]`` for the process in the first quadrant;
* :class:`WedgeModel` -- opening ``beta``, drift angle ``theta`` and reflection
  angles ``delta``, ``epsilon`` for a standard Brownian motion in a wedge.

The key parameter is ``alpha = (delta + epsilon - pi) / beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import ConeMembershipError, RegimeViolation

__all__ = [
    "QuadrantModel",
    "WedgeModel",
    "TransformClass",
    "quadrant_to_wedge",
    "wedge_to_quadrant",
    "phi_map",
    "find_dr",
    "dr_candidates",
    "classify",
    "classify_alpha",
    "rational_approx",
    "model_from_dict",
    "model_to_dict",
]

RATIONAL = "rational"
ALGEBRAIC = "algebraic"
DFINITE = "D-finite"
DALGEBRAIC = "D-algebraic"
UNCLASSIFIED = "unclassified"

R_SEARCH = 50


@dataclass(frozen=True)
class QuadrantModel:
    sigma11: float
    sigma12: float
    sigma22: float
    mu1: float
    mu2: float
    r1: float
    r2: float

    def __post_init__(self):
        if not (self.sigma11 > 0 and self.sigma22 > 0 and self.det > 0):
            raise ValueError("covariance matrix must be positive definite")

    @property
    def det(self) -> float:
        return self.sigma11 * self.sigma22 - self.sigma12**2

    @property
    def sigma(self) -> np.ndarray:
        return np.array([[self.sigma11, self.sigma12], [self.sigma12, self.sigma22]])

    @property
    def mu(self) -> np.ndarray:
        return np.array([self.mu1, self.mu2])

    @property
    def R(self) -> np.ndarray:
        return np.array([[1.0, -self.r2], [-self.r1, 1.0]])

    def wedge(self, tol: Tolerances = DEFAULT) -> "WedgeModel":
        return quadrant_to_wedge(self, tol)

    @property
    def alpha(self) -> float:
        return self.wedge().alpha


@dataclass(frozen=True)
class WedgeModel:
    beta: float
    theta: float
    delta: float
    epsilon: float

    def __post_init__(self):
        for name in ("beta", "delta", "epsilon"):
            value = getattr(self, name)
            if not 0.0 < value < math.pi:
                raise ValueError(f"{name}={value!r} must lie in (0, pi)")
        if not 0.0 < self.theta < self.beta:
            raise RegimeViolation(
                f"drift angle theta={self.theta!r} is not interior to the wedge (0, {self.beta!r})"
            )
        if self.alpha < 1.0 - DEFAULT.integer:
            raise RegimeViolation(f"alpha={self.alpha!r} < 1: no absorption at the vertex")

    @property
    def alpha(self) -> float:
        return (self.delta + self.epsilon - math.pi) / self.beta

    @property
    def pi_over_beta(self) -> float:
        return math.pi / self.beta


@dataclass(frozen=True)
class TransformClass:
    """Position of the Laplace transform in the rational / algebraic /
    D-finite / D-algebraic hierarchy, with the representation
    ``alpha = d - 1 + r*pi/beta`` when one exists."""

    kind: str
    d: Optional[int] = None
    r: Optional[int] = None
    memberships: dict = field(default_factory=dict, compare=False)

    @property
    def dr(self):
        return None if self.d is None else (self.d, self.r)


def quadrant_to_wedge(m: QuadrantModel, tol: Tolerances = DEFAULT) -> WedgeModel:
    """Angles of the wedge process equivalent to ``m``.

    Raises :class:`RegimeViolation` if the drift is not interior to the wedge
    or ``alpha < 1``.
    """
    sq = math.sqrt(m.det)
    # atan2 form of cos(beta) = -sigma12/sqrt(sigma11*sigma22); better conditioned near 0 and pi
    beta = math.atan2(sq, -m.sigma12)
    theta = math.atan2(m.mu2 * sq, m.sigma22 * m.mu1 - m.sigma12 * m.mu2)
    delta = math.atan2(sq, -(m.r2 * m.sigma22 + m.sigma12))
    epsilon = math.atan2(sq, -(m.sigma11 * m.r1 + m.sigma12))
    return WedgeModel(beta, theta, delta, epsilon)


def wedge_to_quadrant(w: WedgeModel, speed: float = 1.0) -> QuadrantModel:
    """Canonical quadrant model (unit diagonal covariance) for ``w``.

    ``speed`` is the norm of the drift of the wedge process; the angles alone
    only fix its direction.
    """
    b, t = w.beta, w.theta
    return QuadrantModel(
        sigma11=1.0,
        sigma12=-math.cos(b),
        sigma22=1.0,
        mu1=speed * math.sin(b - t),
        mu2=speed * math.sin(t),
        r1=math.sin(w.epsilon - b) / math.sin(w.epsilon),
        r2=math.sin(w.delta - b) / math.sin(w.delta),
    )


def phi_matrix(m: QuadrantModel) -> np.ndarray:
    beta = math.atan2(math.sqrt(m.det), -m.sigma12)
    scale = np.diag([math.sqrt(m.sigma11), math.sqrt(m.sigma22)])
    return scale @ np.array([[math.sin(beta), -math.cos(beta)], [0.0, 1.0]])


def phi_map(m: QuadrantModel, point, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Linear map sending the wedge of opening beta onto the quadrant."""
    p = np.asarray(point, dtype=float)
    image = phi_matrix(m) @ p
    slack = tol.cone * max(1.0, float(np.abs(p).max()))
    if image.min() < -slack:
        raise ConeMembershipError(f"point {tuple(p)} lies outside the wedge")
    return image


def rational_approx(x: float, tol: Tolerances = DEFAULT) -> Optional[Fraction]:
    """Detect a float that is a rounded rational number.

    The continued fraction of ``x`` is expanded exactly; it is truncated when a
    partial quotient exceeds ``tol.cf_max_quotient`` (the tail is rounding
    noise). Returns ``None`` after ``tol.cf_max_depth`` terms or when the
    denominator exceeds ``tol.cf_max_denominator``.
    """
    rem = Fraction(x)
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    for _ in range(tol.cf_max_depth):
        a = math.floor(rem)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > tol.cf_max_denominator:
            return None
        frac = rem - a
        if frac == 0 or 1 / frac > tol.cf_max_quotient:
            return Fraction(h1, k1)
        rem = 1 / frac
    return None


def dr_candidates(alpha: float, beta: float, tol: float = DEFAULT.integer):
    """All ``(d, r)`` with ``|r| <= 50``, ``d != 1`` and ``alpha = d-1 + r*pi/beta``."""
    out = []
    pb = math.pi / beta
    for r in range(-R_SEARCH, R_SEARCH + 1):
        d = round(alpha + 1 - r * pb)
        if d != 1 and abs(alpha - (d - 1) - r * pb) < tol:
            out.append((int(d), r))
    return out


def find_dr(alpha: float, beta: float, tol: float = DEFAULT.integer):
    """Representation ``alpha = d - 1 + r*pi/beta`` or ``None``.

    Integer ``alpha`` always gets ``(alpha + 1, 0)``. Otherwise, when
    ``beta/pi = p/q`` is rational the representatives with ``|d| < q`` are
    preferred (they keep the roots of the decoupling pair distinct); the
    smallest ``|r|`` wins, ties broken by ``|d|``.
    """
    cands = dr_candidates(alpha, beta, tol)
    if not cands:
        return None
    for d, r in cands:
        if r == 0:
            return d, r
    frac = rational_approx(beta / math.pi)
    if frac is not None:
        bounded = [c for c in cands if abs(c[0]) < frac.denominator]
        cands = bounded or cands
    return min(cands, key=lambda c: (abs(c[1]), abs(c[0])))


def classify_alpha(alpha: float, beta: float, tol: float = DEFAULT.integer) -> TransformClass:
    n = round(alpha)
    cands = dr_candidates(alpha, beta, tol)
    members = {
        RATIONAL: n >= 1 and abs(alpha - n) < tol,
        ALGEBRAIC: bool(cands) and rational_approx(beta / math.pi) is not None,
        DFINITE: any(d >= 2 for d, _ in cands),
        DALGEBRAIC: bool(cands),
    }
    kind = next((k for k in (RATIONAL, ALGEBRAIC, DFINITE, DALGEBRAIC) if members[k]), UNCLASSIFIED)
    dr = find_dr(alpha, beta, tol) if cands else None
    d, r = dr if dr else (None, None)
    return TransformClass(kind, d, r, members)


def classify(w: WedgeModel, tol: float = DEFAULT.integer) -> TransformClass:
    """Sufficient-condition classification of the Laplace transforms of ``w``."""
    return classify_alpha(w.alpha, w.beta, tol)


def model_from_dict(desc: dict) -> QuadrantModel:
    """Parse a JSON model descriptor (quadrant or wedge form)."""
    if "sigma" in desc:
        (s11, s12), (s21, s22) = desc["sigma"]
        if abs(s12 - s21) > 1e-12 * max(1.0, abs(s12)):
            raise ValueError("sigma must be symmetric")
        m1, m2 = desc["mu"]
        r1, r2 = desc["r"]
        return QuadrantModel(float(s11), float(s12), float(s22), float(m1), float(m2), float(r1), float(r2))
    if "beta" in desc:
        w = WedgeModel(float(desc["beta"]), float(desc["theta"]), float(desc["delta"]), float(desc["epsilon"]))
        return wedge_to_quadrant(w, float(desc.get("speed", 1.0)))
    raise ValueError("model descriptor needs either sigma/mu/r or beta/theta/delta/epsilon")


def model_to_dict(m: QuadrantModel) -> dict:
    return {
        "sigma": [[m.sigma11, m.sigma12], [m.sigma12, m.sigma22]],
        "mu": [m.mu1, m.mu2],
        "r": [m.r1, m.r2],
    }
