import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from _models import A, B, DALG, DFIN, PI, SYNTH_D0, random_dalgebraic
from wedge_absorb.absorption import exponential_sum
from wedge_absorb.decoupling import decoupling_pair, eval_Q
from wedge_absorb.errors import CardinalityError
from wedge_absorb.kernel import K, k1, k2, special_points, uniform_xy, uy
from wedge_absorb.laplace import (
    boundary_factor,
    boundary_pole_status,
    build_L,
    build_S,
    gluing_function,
    laplace_solution,
    w_eval,
)
from wedge_absorb.model import WedgeModel, quadrant_to_wedge, wedge_to_quadrant

M_DFIN = wedge_to_quadrant(DFIN, 1.3)
M_DALG = wedge_to_quadrant(DALG, 0.8)


def test_gluing_special_values():
    for m in (A, B, M_DALG):
        g = gluing_function(special_points(m))
        assert complex(w_eval(g, g.yplus)) == pytest.approx(1.0, abs=1e-14)
        mid = 0.5 * (g.yplus + g.yminus)
        beta = PI / g.pi_over_beta
        assert complex(w_eval(g, mid)) == pytest.approx(math.cos(PI**2 / (2 * beta)), abs=1e-12)


def test_gluing_is_chebyshev_for_right_angle():
    g = gluing_function(special_points(A))
    rng = np.random.default_rng(0)
    y = rng.normal(size=20) * 3 + 1j * rng.normal(size=20)
    z = (2 * y - (g.yplus + g.yminus)) / (g.yplus - g.yminus)
    assert np.allclose(w_eval(g, y), 2 * z**2 - 1, atol=1e-10)


@pytest.mark.parametrize("m", [A, B, M_DFIN, M_DALG])
def test_gluing_invariance_on_hyperbola(m):
    geom = special_points(m)
    g = gluing_function(geom)
    t = np.geomspace(0.01, 100, 50)
    assert np.max(np.abs(w_eval(g, uy(geom, t)) - w_eval(g, uy(geom, geom.q * t)))) < 1e-8


@pytest.mark.parametrize("m", [B, M_DFIN, M_DALG])
def test_gluing_growth_exponent(m):
    geom = special_points(m)
    g = gluing_function(geom)
    y = np.array([1e3, 1e4, 1e5])
    lw = np.log(np.abs(w_eval(g, y)))
    slopes = np.diff(lw) / np.diff(np.log(y))
    assert np.all(np.abs(slopes / g.pi_over_beta - 1) < 0.01)


def test_gluing_injective_on_sample():
    geom = special_points(M_DALG)
    g = gluing_function(geom)
    # s -> q/s folds the sector onto itself; |s| > 1 covers the domain once
    a = np.geomspace(1.05, 20, 30)
    b = np.linspace(0.05, 2 * geom.wedge.beta - 0.05, 30)
    s = (a[:, None] * np.exp(1j * b[None, :])).ravel()
    w = w_eval(g, uy(geom, s))
    d = np.abs(w[:, None] - w[None, :]) + np.eye(w.size)
    assert d.min() > 1e-9


def test_instance_b_correction_is_trivial():
    sol = laplace_solution(B)
    assert sol.S.points == () and sol.S.degree == 0
    y = np.array([0.5, 1.0, 2.0, 7.0])
    assert np.allclose(sol.S(w_eval(sol.gluing, y)), 1.0)
    assert np.allclose(sol.phi1(y), 8 / (y * (y + 2) * (y + 4)), rtol=1e-12)
    assert complex(sol.phi1(1.0)) == pytest.approx(8 / 15, abs=1e-14)


def test_synthetic_rational_cardinality():
    g = special_points(SYNTH_D0)
    s = build_S(g, decoupling_pair(g, 0, 1))
    assert s.mode == "poles" and len(s.points) == 1


@pytest.mark.parametrize("m,d,r", [(M_DFIN, 6, -1), (M_DALG, 0, 1)])
def test_correction_normalised(m, d, r):
    sol = laplace_solution(m, d, r)
    assert abs(sol.S(sol.S.w0) - 1) < 1e-12
    assert sol.S.degree == -r


@pytest.mark.parametrize("m", [A, B])
def test_phi1_matches_quadrature(m):
    es = exponential_sum(m)
    sol = laplace_solution(m)
    for y in (0.5, 1.0, 2.0):
        val, _ = quad(lambda v: (1 - es(0.0, v)) * math.exp(-y * v), 0, 40 / y, epsabs=1e-12, epsrel=1e-12)
        assert abs(complex(sol.phi1(y)).real - val) < 1e-5
        assert abs(complex(sol.phi1(y) * eval_Q(sol.pair, y)) - 1) < 1e-9


@pytest.mark.parametrize("m", [A, B, M_DFIN, M_DALG])
def test_final_value_and_tail(m):
    sol = laplace_solution(m)
    for y in (1e-6, 1e-7):
        assert abs(complex(y * sol.phi1(y)) - 1) < 1e-4
    y = np.geomspace(1e4, 1e7, 7)
    ratio = (sol.phi1(y) * y ** (sol.alpha + 1)).real
    assert ratio.min() > 0
    assert ratio.max() / ratio.min() - 1 < 0.02


@pytest.mark.parametrize("m", [A, B, M_DFIN, M_DALG])
def test_phi1_positive_and_decreasing(m):
    sol = laplace_solution(m)
    y = np.linspace(0.01, 100, 400)
    v = sol.phi1(y)
    assert np.max(np.abs(v.imag)) < 1e-10 * np.max(np.abs(v))
    assert np.all(v.real > 0) and np.all(np.diff(v.real) < 0)


def test_polynomial_l_instances():
    la = laplace_solution(A).L
    assert la.coeffs == pytest.approx(np.array([[1.0, 0.5], [0.5, 0.0]]), abs=1e-12)
    lb = laplace_solution(B).L
    expect = np.array([[1.0, 0.75, 0.125], [0.75, 0.25, 0.0], [0.125, 0.0, 0.0]])
    assert lb.coeffs == pytest.approx(expect, abs=1e-12)
    for L in (la, lb):
        assert L.residual < 1e-8 and L.max_imag < 1e-10


def test_l_vanishing_numerator_on_curve():
    sol = laplace_solution(B)
    geom = sol.geom
    s = np.exp(1j * np.linspace(0.1, 6, 50)) * np.linspace(0.3, 3, 50)
    x, y = uniform_xy(geom, s)
    num = k1(B, x, y) * sol.pair.P(x) + k2(B, x, y) * sol.pair.Q(y)
    assert np.max(np.abs(num)) < 1e-10 * np.max(np.abs(k1(B, x, y) * sol.pair.P(x)))
    assert np.max(np.abs(sol.L(x, y) * K(B, x, y))) < 1e-10 * np.max(np.abs(k1(B, x, y) * sol.pair.P(x)))


def test_build_l_degree_bound():
    sol = laplace_solution(B)
    c = sol.L.coeffs
    deg = max(i + j for i in range(c.shape[0]) for j in range(c.shape[1]) if abs(c[i, j]) > 1e-12)
    assert deg <= sol.d - 1


def test_build_l_requires_polynomial_pair():
    sol = laplace_solution(M_DALG)
    with pytest.raises(ValueError):
        build_L(M_DALG, sol.pair)


@pytest.mark.parametrize("m", [A, B, M_DFIN, M_DALG])
def test_functional_equation(m):
    sol = laplace_solution(m)
    rng = np.random.default_rng(11)
    x = rng.uniform(0.1, 5, 100) + 1j * rng.uniform(-5, 5, 100)
    y = rng.uniform(0.1, 5, 100) + 1j * rng.uniform(-5, 5, 100)
    lhs = K(m, x, y) * sol.phi(x, y)
    rhs = k1(m, x, y) * sol.phi1(y) + k2(m, x, y) * sol.phi2(x)
    assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_double_transform_matches_exponential_sum():
    sol = laplace_solution(B)
    es = exponential_sum(B)
    assert abs(complex(sol.phi(1.0, 1.0)) - es.laplace(1.0, 1.0)) < 1e-9 * abs(es.laplace(1.0, 1.0))
    assert complex(sol.phi(1.0, 1.0)).real == pytest.approx(0.853333333333333, rel=1e-12)
    assert abs(complex(sol.phi(1e6, 1.0))) < 1e-5


@pytest.mark.parametrize("m", [B, M_DFIN, M_DALG])
def test_boundary_value_problem(m):
    sol = laplace_solution(m)
    t = np.geomspace(0.1, 10, 10)
    assert np.max(sol.bvp_residual(t)) < 1e-8


def test_boundary_factor_swap_symmetry():
    geom = special_points(B)
    t = np.geomspace(0.2, 5, 10)
    x, y, yb = geom.x(t), geom.y(t), geom.y(geom.q * t)
    assert np.allclose(boundary_factor(B, x, y, yb) * boundary_factor(B, x, yb, y), 1.0, atol=1e-12)


def test_boundary_pole_status():
    assert boundary_pole_status(quadrant_to_wedge(B)) == "absent"
    assert boundary_pole_status(WedgeModel(1.0, 0.5, 2.0, PI - 0.25)) == "boundary"
    assert boundary_pole_status(WedgeModel(1.0, 0.9, 2.0, 2.8)) == "present"


def test_cardinality_error_on_wrong_count():
    g = special_points(M_DFIN)
    pair = decoupling_pair(g, 6, -1)
    bad = type(pair)(pair.d, -2, pair.mode, pair.proots, pair.qroots, pair.lam)
    with pytest.raises(CardinalityError):
        build_S(g, bad)


@given(st.integers(0, 10_000), st.sampled_from([1, -1]))
def test_random_models_count_and_bvp(seed, sign):
    rng = np.random.default_rng(seed)
    m, d, r = random_dalgebraic(rng, sign)
    sol = laplace_solution(m, d, r)
    assert len(sol.S.points) == abs(r)
    assert np.max(sol.bvp_residual(np.geomspace(0.2, 5, 5))) < 1e-7
