import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import assume, given
from hypothesis import strategies as st

from _models import A, B, DALG, DOUBLE1, DOUBLE2, PI
from wedge_absorb.absorption import (
    AffineExponentialSum,
    ExponentialSum,
    ab_chain,
    absorption_function,
    absorption_probability,
    boundary_marginals,
    c_coefficients,
    collect_rates,
    double_root_alpha2,
    double_root_sum,
    exponential_sum,
    residual_suite,
)
from wedge_absorb.decoupling import decoupling_pair, simple_root_check
from wedge_absorb.errors import (
    ChainDegenerateError,
    DoubleRootNotImplemented,
    MultipleRootError,
    NotSumOfExponentials,
    ResonanceMismatchError,
    ZeroDenominatorError,
)
from wedge_absorb.kernel import K, k1star, k2star, special_points
from wedge_absorb.model import QuadrantModel, WedgeModel, classify, quadrant_to_wedge, wedge_to_quadrant

GRID = np.arange(0, 5.0001, 0.25)


def sympy_chain(m, alpha):
    """Zig-zag on K = 0 by solving the quadratics exactly: start on k1* = 0, then
    alternately take the other root in y and in x."""
    x, y = sp.symbols("x y")
    s11, s12, s22, m1, m2, r1 = (sp.nsimplify(v) for v in (m.sigma11, m.sigma12, m.sigma22, m.mu1, m.mu2, m.r1))
    kern = sp.Rational(1, 2) * (s11 * x**2 + s22 * y**2 + 2 * s12 * x * y) + m1 * x + m2 * y
    b = [s for s in sp.solve(kern.subs(x, r1 * y), y) if s != 0][0]
    pts = [(r1 * b, b)]
    for k in range(2, 2 * alpha):
        a, b = pts[-1]
        if k % 2 == 0:
            roots = sp.solve(kern.subs(x, a), y)
            b = [r for r in roots if sp.simplify(r - b) != 0][0]
        else:
            roots = sp.solve(kern.subs(y, b), x)
            a = [r for r in roots if sp.simplify(r - a) != 0][0]
        pts.append((a, b))
    return [(float(a), float(b)) for a, b in pts]


def fd_residuals(f, m, pts, h=1e-4):
    """PDE and boundary residuals by central differences (independent of analytic derivatives)."""
    out = []
    for u, v in pts:
        fuu = (f(u + h, v) - 2 * f(u, v) + f(u - h, v)) / h**2
        fvv = (f(u, v + h) - 2 * f(u, v) + f(u, v - h)) / h**2
        fuv = (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h)) / (4 * h * h)
        fu = (f(u + h, v) - f(u - h, v)) / (2 * h)
        fv = (f(u, v + h) - f(u, v - h)) / (2 * h)
        g = 0.5 * (m.sigma11 * fuu + 2 * m.sigma12 * fuv + m.sigma22 * fvv) + m.mu1 * fu + m.mu2 * fv
        out.append(float(abs(g)))
    return max(out)


def fd_neumann(f, m, ts, h=1e-4):
    n1 = max(abs(float((f(h, t) - f(-h, t)) / (2 * h) - m.r1 * (f(0, t + h) - f(0, t - h)) / (2 * h))) for t in ts)
    n2 = max(abs(float(-m.r2 * (f(t + h, 0) - f(t - h, 0)) / (2 * h) + (f(t, h) - f(t, -h)) / (2 * h))) for t in ts)
    return n1, n2


def test_instance_a_chain():
    chain = ab_chain(A, 1, special_points(A))
    assert chain == [(-2.0, -2.0)]
    assert c_coefficients(A, chain) == [1.0]
    assert k1star(A, -2, -2) == 0 and k2star(A, -2, -2) == 0


def test_instance_b_chain():
    chain = ab_chain(B, 2, special_points(B))
    assert chain == [(-4.0, -2.0), (-4.0, -4.0), (-2.0, -4.0)]
    c = c_coefficients(B, chain)
    assert c == [2.0, -3.0, 2.0]
    assert math.fsum(c) == 1.0


@pytest.mark.parametrize("m,alpha", [(A, 1), (B, 2)])
def test_chain_matches_symbolic_oracle(m, alpha):
    assert np.allclose(ab_chain(m, alpha), sympy_chain(m, alpha), atol=1e-12)


def test_instance_values():
    fa = exponential_sum(A)
    assert float(fa(1, 1)) == pytest.approx(math.exp(-4), rel=1e-14)
    U, V = np.meshgrid(GRID, GRID)
    assert np.allclose(fa(U, V), np.exp(-2 * U - 2 * V), rtol=1e-14)
    fb = exponential_sum(B)
    assert float(fb(0, 0)) == 1.0
    ref = 2 * np.exp(-4 * U - 2 * V) - 3 * np.exp(-4 * U - 4 * V) + 2 * np.exp(-2 * U - 4 * V)
    assert np.allclose(fb(U, V), ref, rtol=1e-14)
    assert float(fb(0.25, 0.25)) == pytest.approx(4 * math.exp(-1.5) - 3 * math.exp(-2), rel=1e-14)
    for f in (fa, fb):
        assert abs(float(f(40, 40))) < 1e-12


def test_absorption_probability_rejects_outside():
    with pytest.raises(ValueError):
        absorption_probability(exponential_sum(A), -0.1, 1.0)


def test_compensation_identities_b():
    es = exponential_sum(B)
    (a1, b1, c1), (a2, b2, c2), (a3, b3, c3) = es.terms
    assert abs(c1 * k1star(B, a1, b1)) < 1e-10
    assert abs(c2 * k1star(B, a2, b2) + c3 * k1star(B, a3, b3)) < 1e-10
    assert abs(c3 * k2star(B, a3, b3)) < 1e-10
    assert abs(c1 * k2star(B, a1, b1) + c2 * k2star(B, a2, b2)) < 1e-10
    assert residual_suite(es, B, GRID) == pytest.approx((0, 0, 0), abs=1e-10)


def test_boundary_marginals_b():
    g = special_points(B)
    pair = decoupling_pair(g, 3, 0)
    xs, ys = boundary_marginals(pair, g)
    assert xs == [pytest.approx((-2.0, 2.0)), pytest.approx((-4.0, -1.0))]
    assert math.fsum(w for _, w in xs) == pytest.approx(1.0, abs=1e-14)
    es = exponential_sum(B)
    u = np.linspace(0, 5, 20)
    assert np.allclose(es(u, 0.0), sum(w * np.exp(r * u) for r, w in xs), atol=1e-10)
    assert np.allclose(es(0.0, u), sum(w * np.exp(r * u) for r, w in ys), atol=1e-10)


def test_marginals_match_collected_rates():
    es = exponential_sum(B)
    pair = decoupling_pair(special_points(B), 3, 0)
    xs, ys = boundary_marginals(pair)
    on_u = collect_rates([(a, c) for a, b, c in es.terms])
    on_v = collect_rates([(b, c) for a, b, c in es.terms])
    assert on_u == [pytest.approx(p) for p in sorted(xs)]
    assert on_v == [pytest.approx(p) for p in sorted(ys)]


def test_chain_degenerate():
    with pytest.raises(ChainDegenerateError):
        ab_chain(QuadrantModel(1, 0, 1, 1, 1, -1, 1), 2)


def test_zero_denominator():
    with pytest.raises(ZeroDenominatorError) as err:
        c_coefficients(B, [(-4.0, -2.0), (-2.0, -4.0)])
    assert err.value.index == 2


def test_non_integer_alpha_refused():
    m = wedge_to_quadrant(DALG)
    with pytest.raises(NotSumOfExponentials):
        exponential_sum(m)
    with pytest.raises(NotSumOfExponentials):
        absorption_function(m)
    assert classify(DALG).kind == "D-algebraic"


def test_resonant_alpha_three_not_implemented():
    w = WedgeModel(PI / 5, PI / 10, 0.65 * PI, 0.95 * PI)
    assert simple_root_check(w, 4) is not None
    with pytest.raises(MultipleRootError):
        exponential_sum(wedge_to_quadrant(w))
    with pytest.raises(DoubleRootNotImplemented) as err:
        absorption_function(wedge_to_quadrant(w))
    assert err.value.alpha == 3


@pytest.mark.parametrize("w,which", [(DOUBLE1, "case1"), (DOUBLE2, "case2")])
def test_double_root_formula(w, which):
    m = wedge_to_quadrant(w, 1.3)
    f = absorption_function(m)
    assert isinstance(f, AffineExponentialSum)
    assert float(f(0, 0)) == pytest.approx(1.0, abs=1e-14)
    assert float(double_root_alpha2(m, which, 0.0, 0.0)) == pytest.approx(1.0, abs=1e-14)
    rng = np.random.default_rng(0)
    pts = rng.uniform(0.2, 3, (10, 2))
    scale = max(abs(float(f(u, v))) for u, v in pts)
    assert fd_residuals(f, m, pts) < 1e-5 * max(scale, 1e-3) + 1e-7
    n1, n2 = fd_neumann(f, m, np.linspace(0.1, 3, 10))
    assert n1 < 1e-5 and n2 < 1e-5
    assert residual_suite(f, m, GRID) == pytest.approx((0, 0, 0), abs=1e-12)
    U, V = np.meshgrid(GRID, GRID)
    vals = f(U, V)
    assert vals.min() > -1e-9 and vals.max() < 1 + 1e-9


def test_double_root_case_mismatch():
    m = wedge_to_quadrant(DOUBLE1)
    with pytest.raises(ResonanceMismatchError):
        double_root_sum(m, "case2")
    with pytest.raises(ResonanceMismatchError):
        double_root_sum(B)


def test_exponential_sum_derivatives_against_finite_differences():
    es = exponential_sum(B)
    u, v, h = 0.7, 0.3, 1e-5
    f, fu, fv, *_ = es.derivatives(u, v)
    assert fu == pytest.approx((es(u + h, v) - es(u - h, v)) / (2 * h), abs=1e-8)
    assert fv == pytest.approx((es(u, v + h) - es(u, v - h)) / (2 * h), abs=1e-8)


def test_termwise_kernel_vanishing():
    for m in (A, B):
        for a, b, _ in exponential_sum(m).terms:
            assert abs(K(m, a, b)) < 1e-12


@st.composite
def integer_models(draw):
    alpha = draw(st.integers(1, 4))
    beta = draw(st.floats(0.2, 2.5))
    total = PI + alpha * beta
    assume(total < 2 * PI - 0.05)
    lo, hi = max(total - PI, 0) + 0.02, min(PI, total) - 0.02
    assume(lo < hi)
    delta = lo + draw(st.floats(0, 1)) * (hi - lo)
    w = WedgeModel(beta, draw(st.floats(0.05, 0.95)) * beta, delta, total - delta)
    assume(simple_root_check(w, alpha + 1, ) is None)
    for j in range(1, 2 * alpha - 1):
        assume(abs(math.sin(w.theta - 2 * w.delta + j * w.beta)) > 1e-4)
    return wedge_to_quadrant(w, draw(st.floats(0.3, 3.0))), alpha


@given(integer_models())
def test_random_integer_models(case):
    m, alpha = case
    es = exponential_sum(m)
    assert len(es.terms) == 2 * alpha - 1
    assert abs(math.fsum(es.c) - 1) < 1e-14 * max(abs(c) for c in es.c)
    assert float(es(0, 0)) == pytest.approx(1.0, abs=1e-12)
    scale = max(abs(c) * max(1, abs(a), abs(b)) ** 2 for a, b, c in es.terms)
    pde, n1, n2 = residual_suite(es, m, np.linspace(0, 5, 11))
    assert max(pde, n1, n2) < 1e-9 * scale
    a_end = -2 * (m.mu1 + m.r2 * m.mu2) / (m.sigma11 + m.sigma22 * m.r2**2 + 2 * m.sigma12 * m.r2)
    assert es.terms[-1][0] == pytest.approx(a_end, rel=1e-9)


def test_positivity_and_sign_of_chain_on_samples():
    """Empirical: the sum stays in [0, 1] and every exponent is negative."""
    rng = np.random.default_rng(5)
    U, V = np.meshgrid(GRID, GRID)
    seen = 0
    while seen < 30:
        alpha = int(rng.integers(1, 5))
        beta = rng.uniform(0.2, 2.5)
        total = PI + alpha * beta
        lo, hi = max(total - PI, 0) + 0.02, min(PI, total) - 0.02
        if total >= 2 * PI - 0.05 or lo >= hi:
            continue
        delta = rng.uniform(lo, hi)
        w = WedgeModel(beta, rng.uniform(0.05, 0.95) * beta, delta, total - delta)
        try:
            es = exponential_sum(wedge_to_quadrant(w))
        except MultipleRootError:
            continue
        vals = es(U, V)
        assert vals.min() > -1e-9 and vals.max() < 1 + 1e-9
        assert all(a < 0 and b < 0 for a, b, _ in es.terms)
        seen += 1
