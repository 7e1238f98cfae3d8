import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from lpcurse import fooling as fl
from lpcurse.concentration import intersection_volume
from lpcurse.geometry import PBallBody
from oracles import triangle_distance


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(0.005, 0.2), st.integers(1, 100))
def test_profile_shape(t, delta, d):
    w = delta * math.sqrt(d)
    v = fl.smoothing_profile(t * w, delta, d)
    assert 0.0 <= v <= 1.0
    if t >= 1.0:
        assert v == 1.0 and fl.smoothing_profile_derivative(t * w, delta, d) == 0.0
    # slope never exceeds 2/w
    assert 0.0 <= fl.smoothing_profile_derivative(t * w, delta, d) <= 2.0 / w * (1 + 1e-12)


def test_profile_values_and_c1_joins():
    delta, d = 0.1, 4
    w = delta * 2
    assert fl.smoothing_profile(0.0, delta, d) == 0.0
    assert fl.smoothing_profile(w / 2, delta, d) == pytest.approx(0.5)
    assert fl.smoothing_profile(w, delta, d) == 1.0
    eps = 1e-9
    for knot in (w / 2, w):
        assert fl.smoothing_profile(knot - eps, delta, d) == pytest.approx(fl.smoothing_profile(knot + eps, delta, d), abs=1e-7)
        assert fl.smoothing_profile_derivative(knot - eps, delta, d) == pytest.approx(
            fl.smoothing_profile_derivative(knot + eps, delta, d), abs=1e-6)
    # finite differences of the profile match its derivative
    ts = np.linspace(0.01, 0.99, 37) * w
    h = 1e-7
    fd = (fl.smoothing_profile(ts + h, delta, d) - fl.smoothing_profile(ts - h, delta, d)) / (2 * h)
    assert np.allclose(fd, fl.smoothing_profile_derivative(ts, delta, d), rtol=1e-5, atol=1e-6)


def test_fooling_function_validation():
    b = PBallBody(2, 2)
    with pytest.raises(ValueError):
        fl.FoolingFunction(np.array([[10.0, 0.0]]), 0.02, b)
    with pytest.raises(ValueError):
        fl.FoolingFunction(np.zeros((1, 3)), 0.02, b)
    with pytest.raises(ValueError):
        fl.FoolingFunction(np.zeros((1, 2)), 0.0, b)


def test_delta_window():
    for p in (2.0, 3.0, 4.0, 8.0, math.inf):
        for d in (64, 128, 1024):
            w = fl.admissible_delta(PBallBody(d, p))
            assert w["upper"] > fl.DEFAULT_LP_DELTA
            assert 0 < w["default"] <= min(fl.DEFAULT_LP_DELTA, w["upper"] / 2)
    with pytest.raises(fl.EmptyDeltaWindow):
        fl.delta_window(0.3, 2.0)
    assert fl.delta_window(0.5, 1.0)["upper"] == pytest.approx(0.25)


def test_covering_radius():
    b = PBallBody(9, 4)
    assert fl.covering_radius(b, 0.01) == pytest.approx(b.radius / 6 + 0.01)
    with pytest.raises(ValueError):
        fl.covering_radius(b, 0.0)


def test_dilated_triangle_area():
    b = PBallBody(2, math.inf)  # the square [-1/2, 1/2]^2
    tri = np.array([[-0.3, -0.2], [0.25, -0.1], [0.0, 0.3]])
    delta = 0.05
    w = delta * math.sqrt(2)
    m = 2000
    axis = -0.5 + (np.arange(m) + 0.5) / m
    gx, gy = np.meshgrid(axis, axis)
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    area_grid = np.mean(triangle_distance(grid, tri) <= w)
    # Steiner formula: the dilation stays inside the square here
    edges = np.roll(tri, -1, axis=0) - tri
    area0 = 0.5 * abs(edges[0, 0] * edges[1, 1] - edges[0, 1] * edges[1, 0])
    steiner = area0 + np.linalg.norm(edges, axis=1).sum() * w + math.pi * w * w
    assert area_grid == pytest.approx(steiner, rel=2e-3)
    res = fl.hull_extension_volume_bound(b, 3, delta, 100_000, seed=3, points=tri)
    assert res["direct_mc"] == pytest.approx(area_grid, rel=0.02)


def test_single_point_reduces_to_intersection():
    b = PBallBody(5, 3)
    delta = 0.03
    res = fl.hull_extension_volume_bound(b, 1, delta, 50_000, seed=2, points=np.zeros((1, 5)))
    inter = intersection_volume(b, delta, 50_000, 2)
    assert abs(res["direct_mc"] - inter.estimate) <= 1 / 50_000
    assert res["union_bound"] >= res["direct_mc"]


def test_integral_single_point_quadrature():
    # f = p(|x|) on a Euclidean ball of radius R: E f = int_0^R p(r) d r^{d-1} / R^d dr
    d, delta = 3, 0.1
    b = PBallBody(d, 2)
    R = b.radius
    ref, _ = integrate.quad(lambda r: fl.smoothing_profile(r, delta, d) * d * r ** (d - 1) / R ** d,
                            0.0, R, points=[delta * math.sqrt(d) / 2, delta * math.sqrt(d)])
    res = fl.integral_lower_bound(b, np.zeros((1, d)), delta, 100_000, 5)
    assert abs(res["integral_estimate"] - ref) < 4 * res["integral_stderr"]
    assert res["vanishes_at_points"]
    assert res["integral_estimate"] >= res["bound"] - 4 * res["extension_stderr"]


@pytest.mark.parametrize("d,p,n", [(2, 2.0, 3), (2, math.inf, 5), (3, 4.0, 4), (6, 3.0, 10), (12, math.inf, 24)])
def test_certificates(d, p, n):
    b = PBallBody(d, p)
    delta = 1 / 42
    pts = fl.random_points(b, n, seed=d + n)
    f = fl.FoolingFunction(pts, delta, b)
    cert = fl.lipschitz_certificate(f, 150, seed=1)
    assert cert["passes"]
    assert cert["max_value_ratio"] > 0 and cert["max_gradient_ratio"] > 0
    grad = fl.gradient_check(f, 8, seed=1)
    assert grad["checked"] == 8 and grad["max_relative_error"] < 1e-5
    bc = fl.boundary_checks(f, 20, seed=1)
    assert bc["zero_at_points"] and bc["max_on_hull"] < 1e-12 and bc["one_beyond_width"]


def test_evaluate_many_matches_pointwise():
    b = PBallBody(4, 2)
    f = fl.FoolingFunction(fl.random_points(b, 6, 1), 0.05, b)
    X = fl.random_points(b, 200, 2) * 1.2
    X = X[b.contains(X)]
    many = f.evaluate_many(X)
    single = np.array([fl.evaluate(f, x) for x in X])
    assert np.allclose(many, single, atol=1e-12)
    g = fl.evaluate_gradient(f, X[0])
    assert g.shape == (4,)
