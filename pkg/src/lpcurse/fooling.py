"""Fooling functions for cubature rules on D_p^d.

For a point set P in the body and delta > 0, ``f(x) = p_delta(dist(x, conv P))``
vanishes on conv P, equals 1 at distance >= delta sqrt(d), is C^1, and has
Lip(f) <= 2/(delta sqrt(d)) and Lip(D^theta f) <= 40/(delta^2 d).  Any rule
that only samples P cannot tell f from 0, so its error is at least the
integral of f.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .concentration import Estimate, intersection_volume
from .geometry import PBallBody
from .hull import (DEFAULT_MAX_ITER, DEFAULT_TOL, HullDistance, distance_to_hull,
                   hull_distance_lower_bounds, hull_distance_upper_bounds)
from .parallel import check_seed, stream
from .sampling import UNIFORM_NORMALIZED, chunk_kernel, iter_sample_chunks

DEFAULT_LP_DELTA = 1.0 / 42.0
SECOND_LIPSCHITZ_FACTOR = 40.0

# stream ids, kept apart from the sampling stream 0
_POINTS_STREAM = 7
_PAIRS_STREAM = 8
_GRAD_STREAM = 9


class EmptyDeltaWindow(ValueError):
    """rad/(sqrt(d) L) >= 2: the small-diameter condition fails and no delta is admissible."""


# -- smoothing profile --------------------------------------------------------

def smoothing_profile(t, delta: float, d: int):
    """Piecewise quadratic C^1 ramp from 0 (t = 0) to 1 (t >= delta sqrt(d))."""
    w = delta * math.sqrt(d)
    t = np.asarray(t, dtype=float)
    c = 2.0 / (w * w)
    out = np.where(t <= w / 2, c * t * t, np.where(t < w, -c * t * t + 4.0 / w * t - 1.0, 1.0))
    return float(out) if out.ndim == 0 else out


def smoothing_profile_derivative(t, delta: float, d: int):
    w = delta * math.sqrt(d)
    t = np.asarray(t, dtype=float)
    c = 4.0 / (w * w)
    out = np.where(t <= w / 2, c * t, np.where(t < w, -c * t + 4.0 / w, 0.0))
    return float(out) if out.ndim == 0 else out


# -- the function -------------------------------------------------------------

@dataclass(frozen=True)
class FoolingFunction:
    points: np.ndarray
    delta: float
    body: PBallBody
    tolerance: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    width: float = field(init=False)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[1] != self.body.d:
            raise ValueError(f"points have dimension {pts.shape[1]}, body has {self.body.d}")
        if not self.delta > 0:
            raise ValueError("delta must be > 0")
        if not np.all(self.body.contains(pts)):
            raise ValueError("every point must lie in the body")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "width", self.delta * math.sqrt(self.body.d))

    @property
    def d(self) -> int:
        return self.body.d

    @property
    def lipschitz_bound(self) -> float:
        return 2.0 / self.width

    @property
    def gradient_lipschitz_bound(self) -> float:
        return SECOND_LIPSCHITZ_FACTOR / (self.delta ** 2 * self.d)

    def hull_distance(self, x, stop_above: Optional[float] = None) -> HullDistance:
        return distance_to_hull(x, self.points, self.tolerance, self.max_iter, stop_above)

    def in_hull(self, x) -> bool:
        """Scale-aware membership: dist <= tolerance * delta sqrt(d) * 1e-3."""
        return self.hull_distance(x).dist <= self.tolerance * self.width * 1e-3

    def evaluate(self, x) -> float:
        return self.value_and_gradient(x)[0]

    def value_and_gradient(self, x) -> Tuple[float, np.ndarray, bool]:
        """(f(x), grad f(x), approximate-distance flag)."""
        x = np.asarray(x, dtype=float)
        h = self.hull_distance(x, stop_above=self.width)
        if h.lower_bound_only or h.dist >= self.width:
            return 1.0, np.zeros(self.d), h.approximate
        if h.dist == 0.0:
            return 0.0, np.zeros(self.d), h.approximate
        value = smoothing_profile(h.dist, self.delta, self.d)
        slope = smoothing_profile_derivative(h.dist, self.delta, self.d)
        return value, slope * (x - h.projection) / h.dist, h.approximate

    def evaluate_gradient(self, x) -> np.ndarray:
        return self.value_and_gradient(x)[1]

    def hull_distances(self, X: np.ndarray, cap: Optional[float] = None) -> np.ndarray:
        """Distances for many points; values >= ``cap`` may be returned as ``cap``."""
        X = np.atleast_2d(X)
        out = np.empty(X.shape[0])
        lb = hull_distance_lower_bounds(X, self.points)
        ub = hull_distance_upper_bounds(X, self.points)
        for i in range(X.shape[0]):
            if cap is not None and lb[i] >= cap:
                out[i] = cap
            elif ub[i] == 0.0:
                out[i] = 0.0
            else:
                h = self.hull_distance(X[i], stop_above=cap)
                out[i] = cap if (h.lower_bound_only or (cap is not None and h.dist >= cap)) else h.dist
        return out

    def evaluate_many(self, X: np.ndarray) -> np.ndarray:
        return smoothing_profile(self.hull_distances(X, cap=self.width), self.delta, self.d)


def evaluate(f: FoolingFunction, x) -> float:
    return f.evaluate(x)


def evaluate_gradient(f: FoolingFunction, x) -> np.ndarray:
    return f.evaluate_gradient(x)


# -- delta window and covering --------------------------------------------------

def delta_window(L: float, ratio: float) -> dict:
    """Admissible delta range for a body with isotropic constant L and rad/(sqrt(d) L) = ratio."""
    upper = L * (1.0 - ratio / 2.0)
    if upper <= 0:
        raise EmptyDeltaWindow(
            f"rad/(sqrt(d) L) = {ratio:.6g} >= 2 violates the small-diameter condition; "
            "no admissible delta")
    return {"upper": upper, "default": min(DEFAULT_LP_DELTA, upper / 2.0)}


def admissible_delta(body: PBallBody) -> dict:
    return delta_window(body.L, body.radius_ratio)


def covering_radius(body: PBallBody, delta: float) -> float:
    """r_d = rad/(2 sqrt(d)) + delta: n balls of radius r_d sqrt(d) cover the delta-extended hull."""
    if not delta > 0:
        raise ValueError("delta must be > 0")
    return body.radius / (2.0 * math.sqrt(body.d)) + delta


# -- Monte Carlo bounds ---------------------------------------------------------

def random_points(body: PBallBody, n_points: int, seed: int) -> np.ndarray:
    """Uniform points of D_p^d from a stream kept apart from the integration samples."""
    kernel = chunk_kernel(body, UNIFORM_NORMALIZED)
    return kernel(stream(check_seed(seed), _POINTS_STREAM), n_points)


def _combined(*errs: float) -> float:
    return math.sqrt(sum(e * e for e in errs))


def hull_extension_volume_bound(body: PBallBody, n_points: int, delta: float, mc_n: int, seed: int,
                                points: Optional[np.ndarray] = None) -> dict:
    """Direct Monte Carlo volume of (conv P + delta sqrt(d) B_2) ∩ K next to the covering bound.

    ``union_bound = n * vol(K ∩ r_d sqrt(d) B_2)`` estimated with the same seed.
    """
    if points is None:
        points = random_points(body, n_points, seed)
    f = FoolingFunction(points, delta, body)
    n = f.points.shape[0]
    count = 0
    for X in iter_sample_chunks(body, UNIFORM_NORMALIZED, mc_n, seed):
        # cap just above the width so capped rows count as outside
        dist = f.hull_distances(X, cap=float(np.nextafter(f.width, np.inf)))
        count += int(np.count_nonzero(dist <= f.width))
    direct = count / mc_n
    direct_se = math.sqrt(direct * (1.0 - direct) / mc_n)
    inter = intersection_volume(body, covering_radius(body, delta), mc_n, seed)
    union = n * inter.estimate
    union_se = n * inter.stderr
    return {
        "direct_mc": direct,
        "direct_stderr": direct_se,
        "union_bound": union,
        "union_stderr": union_se,
        "combined_stderr": _combined(direct_se, union_se),
        "n_points": n,
        "covering_radius": covering_radius(body, delta),
    }


def integral_lower_bound(body: PBallBody, points: np.ndarray, delta: float, mc_n: int, seed: int) -> dict:
    """Monte Carlo integral of the fooling function against 1 - vol(hull extension ∩ K).

    Both use the same samples. ``vanishes_at_points`` checks f(x_i) == 0 exactly.
    """
    f = FoolingFunction(points, delta, body)
    total = 0.0
    total2 = 0.0
    inside = 0
    for X in iter_sample_chunks(body, UNIFORM_NORMALIZED, mc_n, seed):
        dist = f.hull_distances(X, cap=f.width)
        vals = smoothing_profile(dist, f.delta, f.d)
        total += math.fsum(vals.tolist())
        total2 += float(vals @ vals)
        inside += int(np.count_nonzero(dist < f.width))
    mean = total / mc_n
    se = math.sqrt(max(total2 / mc_n - mean * mean, 0.0) / mc_n)
    vol = inside / mc_n
    vol_se = math.sqrt(vol * (1.0 - vol) / mc_n)
    at_points = np.array([f.evaluate(p) for p in f.points])
    return {
        "integral_estimate": mean,
        "integral_stderr": se,
        "extension_volume": vol,
        "extension_stderr": vol_se,
        "bound": 1.0 - vol,
        "vanishes_at_points": bool(np.all(at_points == 0.0)),
    }


# -- certification ------------------------------------------------------------

def _near_hull_points(f: FoolingFunction, rng: np.random.Generator, m: int, reach: float) -> np.ndarray:
    """Points within ``reach * width`` of random low-dimensional faces of the hull.

    Faces are spanned by 1-3 random points; the push direction is biased away
    from the centroid so that probes also leave the hull in low dimension.
    """
    n = f.points.shape[0]
    centre = f.points.mean(axis=0)
    out = np.empty((m, f.d))
    for i in range(m):
        k = int(rng.integers(1, min(n, 3) + 1))
        idx = rng.choice(n, size=k, replace=False)
        y = rng.dirichlet(np.ones(k)) @ f.points[idx]
        u = rng.standard_normal(f.d)
        u /= np.linalg.norm(u)
        out_dir = y - centre
        norm = np.linalg.norm(out_dir)
        if norm > 0:
            u = u + 2.0 * out_dir / norm
            u /= np.linalg.norm(u)
        out[i] = y + u * reach * f.width * rng.random()
    return out


def lipschitz_certificate(f: FoolingFunction, n_pairs: int, seed: int) -> dict:
    """Largest observed |f(x)-f(y)|/|x-y| and |grad f(x) - grad f(y)|/|x-y| over random pairs."""
    rng = stream(check_seed(seed), _PAIRS_STREAM)
    X = _near_hull_points(f, rng, n_pairs, 1.5)
    step = rng.standard_normal((n_pairs, f.d))
    step *= (f.width * rng.random(n_pairs) / np.linalg.norm(step, axis=1))[:, None]
    Y = X + step
    max_val = 0.0
    max_grad = 0.0
    approx = False
    for x, y in zip(X, Y):
        fx, gx, ax = f.value_and_gradient(x)
        fy, gy, ay = f.value_and_gradient(y)
        approx |= ax or ay
        sep = float(np.linalg.norm(x - y))
        if sep == 0.0:
            continue
        max_val = max(max_val, abs(fx - fy) / sep)
        max_grad = max(max_grad, float(np.linalg.norm(gx - gy)) / sep)
    # slack for rounding in the distance solver
    slack = 1.0 + 1e-9
    return {
        "max_value_ratio": max_val,
        "max_gradient_ratio": max_grad,
        "value_bound": f.lipschitz_bound,
        "gradient_bound": f.gradient_lipschitz_bound,
        "approximate": approx,
        "passes": max_val <= f.lipschitz_bound * slack and max_grad <= f.gradient_lipschitz_bound * slack,
    }


def _support(h: HullDistance) -> frozenset:
    return frozenset(np.nonzero(h.weights > 0)[0].tolist())


def gradient_check(f: FoolingFunction, n_points: int, seed: int, rel_step: float = 1e-6,
                   max_tries: int = 20) -> dict:
    """Compare the analytic gradient with central differences at step rel_step * delta sqrt(d).

    Test points have hull distance in (0.05, 0.95) * delta sqrt(d), and a point
    only counts when every stencil point projects onto the same face, so the
    distance is smooth on the whole stencil.
    """
    rng = stream(check_seed(seed), _GRAD_STREAM)
    h_step = rel_step * f.width
    errors = []
    tries = 0
    while len(errors) < n_points and tries < max_tries * n_points:
        tries += 1
        x = _near_hull_points(f, rng, 1, 1.0)[0]
        hx = f.hull_distance(x)
        if not (0.05 * f.width < hx.dist < 0.95 * f.width):
            continue
        face = _support(hx)
        fd = np.empty(f.d)
        smooth = True
        for i in range(f.d):
            e = np.zeros(f.d)
            e[i] = h_step
            hp = f.hull_distance(x + e)
            hm = f.hull_distance(x - e)
            if _support(hp) != face or _support(hm) != face:
                smooth = False
                break
            fp = smoothing_profile(hp.dist, f.delta, f.d)
            fm = smoothing_profile(hm.dist, f.delta, f.d)
            fd[i] = (fp - fm) / (2.0 * h_step)
        if not smooth:
            continue
        g = f.evaluate_gradient(x)
        errors.append(float(np.linalg.norm(fd - g) / np.linalg.norm(g)))
    return {
        "checked": len(errors),
        "max_relative_error": max(errors) if errors else float("nan"),
        "step": h_step,
    }


def boundary_checks(f: FoolingFunction, n_checks: int, seed: int) -> dict:
    """f at the points, at random hull points, and beyond delta sqrt(d) along random directions."""
    rng = stream(check_seed(seed), _GRAD_STREAM + 1)
    at_points = [f.evaluate(p) for p in f.points]
    n = f.points.shape[0]
    lam = rng.dirichlet(np.ones(n), size=n_checks)
    inner = [f.evaluate(x) for x in lam @ f.points]
    u = rng.standard_normal((n_checks, f.d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    support = (u @ f.points.T).max(axis=1)
    # <x,u> - max_i <p_i,u> >= width forces dist >= width
    outer_x = (support + f.width * (1.0 + rng.random(n_checks)))[:, None] * u
    outer = [f.value_and_gradient(x) for x in outer_x]
    return {
        "zero_at_points": all(v == 0.0 for v in at_points),
        "max_on_hull": max(inner) if inner else 0.0,
        "one_beyond_width": all(v == 1.0 and not np.any(g) for v, g, _ in outer),
    }
