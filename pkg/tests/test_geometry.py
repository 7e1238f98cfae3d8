import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lpcurse import geometry as geo
from oracles import grid_second_moment, rejection_volume

P_GRID = [1.0, 1.5, 2.0, 3.0, 4.0, 8.0, math.inf]

dims = st.integers(min_value=1, max_value=2000)
exps = st.one_of(st.floats(min_value=1.0, max_value=500.0), st.just(math.inf))
exps_ge2 = st.one_of(st.floats(min_value=2.0, max_value=500.0), st.just(math.inf))


def test_parse_p():
    assert geo.parse_p("inf") == math.inf
    assert geo.parse_p("∞") == math.inf
    assert geo.parse_p("2.5") == 2.5
    for bad in ["", "abc"]:
        with pytest.raises(ValueError):
            geo.parse_p(bad)


def test_closed_forms_small_cases():
    # D_inf^1 is [-1/2, 1/2]: L^2 = 1/12
    assert geo.isotropic_constant(1, math.inf) == pytest.approx(1 / math.sqrt(12), rel=1e-15)
    # vol B_2^2 = pi, vol B_1^3 = 4/3
    assert math.exp(geo.log_volume_ball(2, 2)) == pytest.approx(math.pi, rel=1e-14)
    assert math.exp(geo.log_volume_ball(3, 1)) == pytest.approx(4 / 3, rel=1e-14)
    # gamma2 for the l_1 ball is 2/((d+1)(d+2))
    for d in [1, 2, 3, 10, 100]:
        assert geo.gamma2(d, 1.0) == pytest.approx(2 / ((d + 1) * (d + 2)), rel=1e-12)
    assert geo.gamma2(4, 2) == pytest.approx(1 / 6, rel=1e-14)


def test_gamma2_l1_grid_quadrature():
    # x_1^2 averaged over a 400^2 x 400 midpoint grid of B_1^3
    assert geo.gamma2(3, 1.0) == pytest.approx(grid_second_moment(3, 1.0, 400), rel=5e-3)


@pytest.mark.parametrize("p", [1.5, 3.0, math.inf])
def test_gamma2_grid_quadrature_d2(p):
    assert geo.gamma2(2, p) == pytest.approx(grid_second_moment(2, p, 3000), rel=2e-3)


@pytest.mark.parametrize("p", P_GRID)
@pytest.mark.parametrize("d", [1, 2, 3, 5, 8, 10])
def test_log_volume_vs_rejection(d, p):
    est, se, hits = rejection_volume(d, p, 1_000_000, seed=d * 31 + int(min(p, 99) * 7))
    if hits < 100:
        pytest.skip("acceptance too rare for a rejection estimate at this n")
    if hits == 1_000_000:
        # the ball fills the cube (d = 1 or p = inf)
        assert math.exp(geo.log_volume_ball(d, p)) == pytest.approx(2.0 ** d, rel=1e-14)
        return
    assert abs(math.exp(geo.log_volume_ball(d, p)) - est) <= 4 * se


@settings(max_examples=200, deadline=None)
@given(dims, exps)
def test_body_is_volume_one(d, p):
    assert geo.log_volume_ball(d, p) + d * geo.log_alpha(d, p) == pytest.approx(0.0, abs=1e-9 * d)


@settings(max_examples=300, deadline=None)
@given(dims, exps)
def test_isotropic_sandwich(d, p):
    b = geo.PBallBody(d, p)
    assert b.L >= geo.L_EUCLIDEAN_LIMIT * (1 - 1e-12)
    assert math.sqrt(d) * b.L <= b.radius * (1 + 1e-12)
    assert b.radius <= (d + 1) * b.L


@settings(max_examples=300, deadline=None)
@given(dims, exps_ge2)
def test_gautschi_lower_bound(d, p):
    assert geo.gamma2(d, p) >= geo.gamma2_lower_bound(d, p) * (1 - 1e-12)


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e6), st.floats(min_value=0.0, max_value=1.0))
def test_gautschi_gap_nonnegative(x, lam):
    # the gap is a difference of log-gammas of size ~ x ln x
    assert geo.gautschi_gap(x, lam) >= -1e-15 * (1.0 + x * math.log1p(x))


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=2, max_value=10 ** 6), exps_ge2)
def test_ratio_bounded_by_sqrt3(d, p):
    r = geo.radius_ratio(d, p)
    assert 1.0 - 1e-12 <= r <= math.sqrt(3) * (1 + 1e-12)


def test_ratio_formulae():
    for d in [1, 2, 7, 64, 10 ** 5, 10 ** 6]:
        assert geo.radius_ratio(d, math.inf) == pytest.approx(math.sqrt(3), rel=1e-12)
        assert geo.radius_ratio(d, 2) == pytest.approx(math.sqrt(1 + 2 / d), rel=1e-12)
    with pytest.raises(ValueError):
        geo.radius_ratio(4, 1.5)


def test_ratio_limit_bound_reached():
    for p in [3.0, 4.0, 8.0, 64.0]:
        bound = geo.radius_ratio_limit_bound(p)
        assert geo.radius_ratio(10 ** 7, p) == pytest.approx(bound, rel=1e-3)
        assert bound < math.sqrt(3)


def test_euclidean_limit_of_L():
    prev = None
    for d in [10 ** 2, 10 ** 4, 10 ** 5, 10 ** 6]:
        err = geo.isotropic_constant(d, 2) - geo.L_EUCLIDEAN_LIMIT
        assert err > 0
        if prev is not None:
            assert err < prev
        prev = err
    assert prev < 2e-6


def test_hnuw_threshold():
    p0 = geo.hnuw_threshold_p()
    assert p0 == pytest.approx(170.5186, abs=1e-3)
    assert geo.radius_over_sqrt_d_limit(p0 * 0.99) < geo.HNUW_RADIUS_THRESHOLD
    assert geo.radius_over_sqrt_d_limit(p0 * 1.01) > geo.HNUW_RADIUS_THRESHOLD
    # the cube fails the HNUW condition but passes the ratio < 2 condition
    chk = geo.small_diameter_check(1000, math.inf)
    assert chk["passes_paper_condition"] and not chk["passes_HNUW_condition"]
    chk = geo.small_diameter_check(1000, 4)
    assert chk["passes_paper_condition"] and chk["passes_HNUW_condition"]


def test_radius_over_sqrt_d_converges():
    for p in [2.0, 4.0, 100.0, math.inf]:
        d = 10 ** 6
        assert geo.radius(d, p) / math.sqrt(d) == pytest.approx(geo.radius_over_sqrt_d_limit(p), rel=1e-4)


def test_monotonicity_certificate():
    rep = geo.monotonicity_certificate()
    assert rep.ok and rep.h_increasing and rep.first_violation is None
    assert len(rep.p_grid) == 200
    assert rep.g_min > 2 * 0.5772156649015329 + 2
    assert rep.g_at_large_x == pytest.approx(math.log(27), abs=1e-6)
    assert rep.summary()["ok"] is True


def test_body_dataclass():
    b = geo.PBallBody(3, 4)
    assert b.L == pytest.approx(b.alpha * math.sqrt(b.gamma2))
    x = np.array([[0.0, 0.0, 0.0], [b.alpha, 0.0, 0.0], [b.alpha * 1.01, 0, 0]])
    assert list(b.contains(x)) == [True, True, False]
    assert b.norm(np.array([3.0, -4.0, 0.0])) == pytest.approx((3 ** 4 + 4 ** 4) ** 0.25)
    assert geo.PBallBody(3, math.inf).is_cube
    d = b.to_dict()
    assert d["d"] == 3 and d["p"] == 4
    with pytest.raises(ValueError):
        geo.PBallBody(0, 2)
    with pytest.raises(ValueError):
        geo.PBallBody(2, 0.5)


def test_large_dimensions_are_finite():
    for p in [1.0, 2.0, 3.0, math.inf]:
        b = geo.PBallBody(10 ** 6, p)
        assert all(math.isfinite(v) for v in (b.alpha, b.gamma2, b.L, b.radius))
