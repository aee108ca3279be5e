"""Monte Carlo estimate of the absorption probability.

Euler-Maruyama steps followed by an oblique projection back into the quadrant.
Every path owns a counter-based Philox4x64-10 stream keyed by ``(seed, path)``;
the stream is bit-identical to ``numpy.random.Philox(key=[seed, path])``.
Outcomes are therefore independent of how paths are split between workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import IntEnum

import numba
import numpy as np

from .errors import TooManyCensoredError
from .model import QuadrantModel

__all__ = [
    "SimConfig",
    "McEstimate",
    "Outcome",
    "step",
    "project",
    "run_path",
    "simulate",
    "estimate",
    "estimate_halfline",
    "philox_raw",
    "default_workers",
]

CENSOR_LIMIT = 0.05
VALID_LIMIT = 0.01


class Outcome(IntEnum):
    ABSORBED = 0
    ESCAPED = 1
    CENSORED = 2


@dataclass(frozen=True)
class SimConfig:
    dt: float
    eps_abs: float
    escape_radius: float
    max_time: float
    n_paths: int
    seed: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0 < self.eps_abs < self.escape_radius:
            raise ValueError("need 0 < eps_abs < escape_radius")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if not self.max_time > 0:
            raise ValueError("max_time must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def max_steps(self) -> int:
        return int(math.ceil(self.max_time / self.dt))

    @classmethod
    def for_model(cls, m: QuadrantModel, start, dt=1e-4, n_paths=20000, seed=0, eps_abs=0.01, escape_radius=None):
        """Defaults scaled to the model.

        The escape radius adds ``6 lambda_max(Sigma)/|mu|`` to the start radius;
        a drifted Brownian motion returns that far against its drift with
        probability about ``e^-12``.
        """
        speed = math.hypot(m.mu1, m.mu2)
        lam = float(np.linalg.eigvalsh(m.sigma)[-1])
        if escape_radius is None:
            escape_radius = float(np.hypot(*start)) + 6 * lam / speed
        max_time = 10 * escape_radius / speed + 10.0
        return cls(dt, eps_abs, escape_radius, max_time, n_paths, seed)


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    std_err: float
    n_absorbed: int
    n_escaped: int
    n_censored: int

    @property
    def n_paths(self) -> int:
        return self.n_absorbed + self.n_escaped + self.n_censored

    @property
    def censored_fraction(self) -> float:
        return self.n_censored / self.n_paths

    @property
    def valid(self) -> bool:
        return self.censored_fraction < VALID_LIMIT

    def as_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "std_err": self.std_err,
            "n_absorbed": self.n_absorbed,
            "n_escaped": self.n_escaped,
            "n_censored": self.n_censored,
            "valid": self.valid,
        }


def default_workers() -> int:
    return max(1, int(os.environ.get("WEDGE_ABSORB_THREADS", "1")))


# Philox4x64-10 ------------------------------------------------------------

_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_PM0 = np.uint64(0xD2E7470EE14C6C93)
_PM1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_TWO_M53 = 2.0**-53


@numba.njit(inline="always")
def _mulhilo(a, b):
    alo, ahi = a & _M32, a >> _S32
    blo, bhi = b & _M32, b >> _S32
    p0 = alo * blo
    p1 = alo * bhi
    p2 = ahi * blo
    mid = (p0 >> _S32) + (p1 & _M32) + (p2 & _M32)
    hi = ahi * bhi + (p1 >> _S32) + (p2 >> _S32) + (mid >> _S32)
    return hi, a * b


@numba.njit(inline="always")
def _philox(c0, c1, c2, c3, k0, k1):
    for i in range(10):
        if i > 0:
            k0 = k0 + _W0
            k1 = k1 + _W1
        hi0, lo0 = _mulhilo(_PM0, c0)
        hi1, lo1 = _mulhilo(_PM1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


@numba.njit(cache=True)
def _philox_raw(k0, k1, n):
    out = np.empty(n, dtype=np.uint64)
    ctr = np.uint64(0)
    for i in range(0, n, 4):
        ctr += _ONE
        r = _philox(ctr, np.uint64(0), np.uint64(0), np.uint64(0), k0, k1)
        for j in range(4):
            if i + j < n:
                out[i + j] = r[j]
    return out


def philox_raw(seed: int, path: int, n: int) -> np.ndarray:
    """First ``n`` raw 64-bit words of the stream of ``path``."""
    return _philox_raw(np.uint64(seed), np.uint64(path), n)


@numba.njit(inline="always")
def _normals(ctr, k0, k1):
    """Four standard normals (Box-Muller) from one Philox block."""
    r0, r1, r2, r3 = _philox(ctr, np.uint64(0), np.uint64(0), np.uint64(0), k0, k1)
    u0 = ((r0 >> _S11) + _ONE) * _TWO_M53
    u2 = ((r2 >> _S11) + _ONE) * _TWO_M53
    t1 = 2.0 * math.pi * (r1 >> _S11) * _TWO_M53
    t3 = 2.0 * math.pi * (r3 >> _S11) * _TWO_M53
    ra = math.sqrt(-2.0 * math.log(u0))
    rb = math.sqrt(-2.0 * math.log(u2))
    return ra * math.cos(t1), ra * math.sin(t1), rb * math.cos(t3), rb * math.sin(t3)


# projection ---------------------------------------------------------------


@numba.njit(inline="always")
def _project(z1, z2, r1, r2):
    """Solve the one-step Skorokhod problem with directions ``(1, -r1)``, ``(-r2, 1)``.

    Returns ``(z1, z2, corner)``; ``corner`` is set when no single face
    push lands in the quadrant, i.e. the step crossed the vertex.
    """
    if z1 >= 0.0 and z2 >= 0.0:
        return z1, z2, False
    if z1 < 0.0:
        w2 = z2 + r1 * z1
        if w2 >= 0.0:
            return 0.0, w2, False
    if z2 < 0.0:
        w1 = z1 + r2 * z2
        if w1 >= 0.0:
            return w1, 0.0, False
    return 0.0, 0.0, True


def project(m: QuadrantModel, z):
    """Python view of the projection; returns ``(point, corner)``."""
    z1, z2, corner = _project(float(z[0]), float(z[1]), m.r1, m.r2)
    return np.array([z1, z2]), bool(corner)


def step(m: QuadrantModel, z, dW, dt: float):
    """One Euler step ``z + mu dt + A dW`` (``A`` the Cholesky factor of Sigma), then projection."""
    a = np.linalg.cholesky(m.sigma)
    raw = np.asarray(z, dtype=float) + m.mu * dt + a @ np.asarray(dW, dtype=float)
    return project(m, raw)


# path kernels ---------------------------------------------------------------


@numba.njit(nogil=True, cache=True)
def _quadrant_paths(mu1, mu2, a11, a21, a22, r1, r2, u0, v0, dt, eps, radius, nmax, seed, lo, hi, out):
    sdt = math.sqrt(dt)
    eps2 = eps * eps
    rad2 = radius * radius
    for p in range(lo, hi):
        k1 = np.uint64(p)
        z1, z2 = u0, v0
        ctr = np.uint64(0)
        res = 2
        g0 = g1 = g2 = g3 = 0.0
        for n in range(nmax + 1):
            d2 = z1 * z1 + z2 * z2
            if d2 <= eps2:
                res = 0
                break
            if d2 >= rad2:
                res = 1
                break
            if n == nmax:
                break
            if n % 2 == 0:
                ctr += _ONE
                g0, g1, g2, g3 = _normals(ctr, seed, k1)
                w1, w2 = g0, g1
            else:
                w1, w2 = g2, g3
            x1 = z1 + mu1 * dt + a11 * sdt * w1
            x2 = z2 + mu2 * dt + sdt * (a21 * w1 + a22 * w2)
            z1, z2, corner = _project(x1, x2, r1, r2)
            if corner:
                res = 0
                break
        out[p - lo] = res


@numba.njit(nogil=True, cache=True)
def _halfline_paths(mu, sigma, u0, dt, radius, nmax, seed, lo, hi, out):
    sdt = math.sqrt(dt)
    s2dt = sigma * sigma * dt
    for p in range(lo, hi):
        k1 = np.uint64(p)
        x = u0
        ctr = np.uint64(0)
        res = 2
        if x <= 0.0:
            out[p - lo] = 0
            continue
        g0 = g1 = g2 = g3 = 0.0
        for n in range(nmax):
            if x >= radius:
                res = 1
                break
            if n % 2 == 0:
                ctr += _ONE
                g0, g1, g2, g3 = _normals(ctr, seed, k1)
                w, b = g0, g1
            else:
                w, b = g2, g3
            xn = x + mu * dt + sigma * sdt * w
            if xn <= 0.0:
                res = 0
                break
            # bridge crossing between two positive grid values
            u = 0.5 * math.erfc(-b / math.sqrt(2.0))
            if u < math.exp(-2.0 * x * xn / s2dt):
                res = 0
                break
            x = xn
        if res == 2 and x >= radius:
            res = 1
        out[p - lo] = res


def _run_chunks(kernel, args, cfg: SimConfig, workers):
    n = cfg.n_paths
    out = np.empty(n, dtype=np.int8)
    workers = max(1, min(workers or default_workers(), n))
    bounds = np.linspace(0, n, workers + 1).astype(int)
    seed = np.uint64(cfg.seed)

    def run(i):
        lo, hi = int(bounds[i]), int(bounds[i + 1])
        kernel(*args, cfg.max_steps, seed, lo, hi, out[lo:hi])

    if workers == 1:
        run(0)
    else:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(run, range(workers)))
    return out


def simulate(m: QuadrantModel, start, cfg: SimConfig, workers=None) -> np.ndarray:
    """Per-path outcome codes (see :class:`Outcome`)."""
    u0, v0 = (float(c) for c in start)
    if u0 < 0 or v0 < 0:
        raise ValueError("start must lie in the closed quadrant")
    a = np.linalg.cholesky(m.sigma)
    args = (m.mu1, m.mu2, a[0, 0], a[1, 0], a[1, 1], m.r1, m.r2, u0, v0, cfg.dt, cfg.eps_abs, cfg.escape_radius)
    return _run_chunks(_quadrant_paths, args, cfg, workers)


def run_path(m: QuadrantModel, start, cfg: SimConfig, path: int = 0) -> Outcome:
    """Outcome of a single path of the stream keyed by ``(cfg.seed, path)``."""
    u0, v0 = (float(c) for c in start)
    a = np.linalg.cholesky(m.sigma)
    out = np.empty(1, dtype=np.int8)
    _quadrant_paths(
        m.mu1, m.mu2, a[0, 0], a[1, 0], a[1, 1], m.r1, m.r2, u0, v0, cfg.dt, cfg.eps_abs,
        cfg.escape_radius, cfg.max_steps, np.uint64(cfg.seed), path, path + 1, out,
    )
    return Outcome(int(out[0]))


def summarize(outcomes: np.ndarray) -> McEstimate:
    counts = np.bincount(outcomes, minlength=3)
    na, ne, nc = (int(c) for c in counts[:3])
    n_eff = na + ne
    p = na / n_eff if n_eff else 0.0
    se = math.sqrt(p * (1 - p) / n_eff) if n_eff > 1 else 1.0
    est = McEstimate(p, se, na, ne, nc)
    if est.censored_fraction > CENSOR_LIMIT:
        raise TooManyCensoredError(est, est.censored_fraction)
    return est


def estimate(m: QuadrantModel, start, cfg: SimConfig, workers=None) -> McEstimate:
    return summarize(simulate(m, start, cfg, workers))


def estimate_halfline(mu: float, u: float, cfg: SimConfig, sigma: float = 1.0, workers=None) -> McEstimate:
    """Probability that ``u + mu t + sigma W_t`` ever reaches 0.

    Crossings between grid times are detected with the Brownian-bridge
    probability ``exp(-2 x0 x1 / (sigma^2 dt))``.
    """
    if u < 0:
        raise ValueError("u must be nonnegative")
    args = (float(mu), float(sigma), float(u), cfg.dt, cfg.escape_radius)
    return summarize(_run_chunks(_halfline_paths, args, cfg, workers))
