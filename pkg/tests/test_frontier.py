import numpy as np
import pytest
from scipy.optimize import brentq, minimize_scalar

from matchbound.errors import DomainError, SingularDenominator
from matchbound.frontier import (FrontierConstants, build_frontier, compute_gamma_star,
                                 gamma_objective, golden_max, h_closed_form, h_derivative,
                                 h_fixed_point, optimal_frontier, verify_fact_tz)

# frozen from a bounded scipy maximization at xatol=1e-12
K_STAR = 1.19967862
GAMMA_STAR = 0.52610487766


def test_objective_endpoints():
    assert gamma_objective(1.0) == 0.5
    assert gamma_objective(2.0) == pytest.approx(0.467343, abs=1e-6)
    with pytest.raises(DomainError):
        gamma_objective(0.5)


def test_gamma_star_against_scipy():
    res = minimize_scalar(lambda k: -gamma_objective(k), bounds=(1, 4), method="bounded",
                          options={"xatol": 1e-12})
    k, g = compute_gamma_star(1e-8)
    assert k == pytest.approx(res.x, abs=1e-6)
    assert g == pytest.approx(-res.fun, abs=1e-12)
    assert k == pytest.approx(K_STAR, abs=1e-7)
    assert g == pytest.approx(GAMMA_STAR, abs=1e-10)


def test_coarse_tolerance_contract():
    k_fine, g_fine = compute_gamma_star(1e-9)
    k, g = compute_gamma_star(1e-2)
    assert abs(k - k_fine) <= 1e-2
    assert abs(g - g_fine) <= 1e-2


def test_golden_max_quadratic():
    assert golden_max(lambda t: -(t - 0.3) ** 2, 0, 1, 1e-10) == pytest.approx(0.3, abs=1e-9)


def test_constants_at_optimum():
    c = FrontierConstants.from_gamma_k(GAMMA_STAR, K_STAR)
    assert c.c == pytest.approx(c.c_from_roots, rel=1e-12)
    assert c.c == pytest.approx(0.064135, abs=1e-6)
    assert c.alpha1 + c.alpha2 == pytest.approx(1.0)
    y = np.linspace(0.01, GAMMA_STAR - 0.01, 50)
    assert np.allclose(c.partial_fractions(y), (GAMMA_STAR - y) / c.quadratic(y), rtol=1e-10)


def test_h_boundary_values(star):
    k, g = star
    c = FrontierConstants.from_gamma_k(g, k)
    assert h_closed_form(0.0, c) == pytest.approx(c.c, rel=1e-12)
    assert h_closed_form(g, c) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(DomainError):
        h_closed_form(g + 0.1, c)


def test_h_derivative_matches_finite_difference(star):
    c = FrontierConstants.from_gamma_k(*star[::-1])
    y = np.linspace(0.05, c.gamma - 0.05, 20)
    d = 1e-6
    fd = (h_closed_form(y + d, c) - h_closed_form(y - d, c)) / (2 * d)
    assert np.allclose(h_derivative(y, c), fd, rtol=1e-6)


def test_k_one_is_identity():
    c = FrontierConstants.from_gamma_k(0.5, 1.0)
    y = np.linspace(0, 0.5, 11)
    assert np.array_equal(h_closed_form(y, c), y)


def test_inverse_against_brentq(star):
    k, g = star
    f = build_frontier(g, k, 1e-3)
    c = f.constants
    for xi in (0.1, 0.3, 0.5, 0.8, 0.95):
        i = round(xi / 1e-3)
        ref = brentq(lambda y: h_closed_form(y, c) - xi, 0, g, xtol=1e-14)
        assert f.G[i] == pytest.approx(ref, abs=1e-12)


def test_tables_shape_and_conventions(star):
    k, g = star
    f = build_frontier(g, k, 1e-3)
    c = f.constants.c
    below = f.x < c
    assert np.all(f.G[below] == 0) and np.all(f.g[below] == 0)
    assert np.all(np.diff(f.G) >= -1e-12)
    assert np.all((f.a >= 0) & (f.a <= 1))
    assert f.a[-1] == pytest.approx(0.0, abs=1e-3)
    h_csv, x_csv = f.tables_csv()
    assert h_csv.splitlines()[0] == "y,H" and x_csv.splitlines()[0] == "x,G,g,a"
    assert len(x_csv.splitlines()) == len(f.x) + 1


def test_fact_at_optimum_and_beyond(star):
    k, g = star
    rep = verify_fact_tz(optimal_frontier(1e-4))
    assert rep.certified_gamma >= g - 1e-3
    assert rep.max_violation_1 <= 1e-9
    over = verify_fact_tz(build_frontier(g + 0.01, k, 1e-4))
    assert over.max_violation_2 > 0.01


def test_fact_on_degenerate_tables(star):
    f = build_frontier(star[1], star[0], 1e-2)
    ones = f.with_threshold(np.ones_like(f.x))
    zero_g = ones.__class__(**{**ones.__dict__, "g": np.zeros_like(f.x)})
    # threshold 1 everywhere with g = 0: the saturated end certifies nothing
    assert verify_fact_tz(zero_g).certified_gamma == 0.0


def test_fixed_point_is_stationary(star):
    k, g = star
    c = FrontierConstants.from_gamma_k(g, k)
    y = np.linspace(0, g, 10_000)
    H = h_closed_form(y, c)
    assert np.max(np.abs(h_fixed_point(H, g) - H)) <= 1e-5


def test_fixed_point_singular():
    with pytest.raises(SingularDenominator):
        h_fixed_point(np.linspace(0, 0.5, 11), 0.5)

