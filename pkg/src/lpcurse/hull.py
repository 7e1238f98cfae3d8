"""Euclidean distance from a point to the convex hull of a finite point set.

The problem ``min ||x - sum_i lam_i p_i||`` over the simplex is a
minimum-norm-point problem for the translated points ``q_i = p_i - x``.
Wolfe's active-set method solves it exactly up to rounding; a Frank-Wolfe
loop takes over if the active set ever degenerates.  Both stop on the
Frank-Wolfe duality gap ``||z||^2 - min_i <z, q_i>``, which bounds
``(dist^2 - dist*^2) / 2`` from above.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 500


@dataclass(frozen=True)
class HullDistance:
    dist: float
    projection: np.ndarray
    weights: np.ndarray
    gap: float
    approximate: bool = False
    # True when the solve stopped early because dist provably exceeds ``stop_above``;
    # ``dist`` is then only a lower bound and ``projection`` the current iterate.
    lower_bound_only: bool = False


def _affine_minimizer(Q: np.ndarray, S: list) -> Optional[np.ndarray]:
    """Weights mu (sum 1) minimizing ||Q[S].T mu||; None if numerically singular."""
    k = len(S)
    if k == 1:
        return np.ones(1)
    P = Q[S]
    G = P @ P.T
    M = np.empty((k + 1, k + 1))
    M[:k, :k] = G
    M[:k, k] = 1.0
    M[k, :k] = 1.0
    M[k, k] = 0.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)):
        return None
    return sol[:k]


def _frank_wolfe(Q: np.ndarray, lam: np.ndarray, tol_abs: float, max_iter: int,
                 stop_above: Optional[float]):
    """Away-step Frank-Wolfe from ``lam``; returns (lam, z, gap, converged, bounded)."""
    z = lam @ Q
    gap = np.inf
    for _ in range(max_iter):
        dots = Q @ z
        zz = float(z @ z)
        j = int(np.argmin(dots))
        gap = zz - float(dots[j])
        if gap <= tol_abs:
            return lam, z, gap, True, False
        if stop_above is not None and zz > 0 and dots[j] > 0 and dots[j] / np.sqrt(zz) >= stop_above:
            return lam, z, gap, False, True
        active = np.nonzero(lam > 0)[0]
        a = active[int(np.argmax(dots[active]))]
        away_gap = float(dots[a]) - zz
        if gap >= away_gap:
            direction = Q[j] - z
            gmax = 1.0
            toward, idx = True, j
        else:
            direction = z - Q[a]
            gmax = lam[a] / (1.0 - lam[a]) if lam[a] < 1.0 else np.inf
            toward, idx = False, a
        dd = float(direction @ direction)
        if dd == 0:
            break
        step = min(max(-float(z @ direction) / dd, 0.0), gmax)
        if toward:
            lam *= 1.0 - step
            lam[idx] += step
        else:
            lam *= 1.0 + step
            lam[idx] -= step
            if step == gmax:
                lam[idx] = 0.0
        lam = np.clip(lam, 0.0, None)
        lam /= lam.sum()
        z = lam @ Q
    dots = Q @ z
    gap = float(z @ z - dots.min())
    return lam, z, gap, gap <= tol_abs, False


def distance_to_hull(x, points, tolerance: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                     stop_above: Optional[float] = None) -> HullDistance:
    """Distance from ``x`` to conv(points) with its projection and simplex weights.

    ``tolerance`` is relative to the squared scale ``max_i ||p_i - x||^2``.
    With ``stop_above`` set, the solve returns as soon as a separating
    hyperplane certifies ``dist >= stop_above``.
    """
    x = np.asarray(x, dtype=float)
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.shape[0] < 1:
        raise ValueError("need at least one point")
    if tolerance <= 0:
        raise ValueError("tolerance must be > 0")
    Q = P - x
    n = Q.shape[0]
    norms2 = np.einsum("ij,ij->i", Q, Q)
    scale = float(norms2.max())
    if scale == 0.0:
        w = np.full(n, 1.0 / n)
        return HullDistance(0.0, P[0].copy(), w, 0.0)
    tol_abs = tolerance * scale

    start = int(np.argmin(norms2))
    S = [start]
    w = np.ones(1)
    z = Q[start].copy()
    gap = np.inf
    converged = False
    degenerate = False
    for _ in range(max_iter):
        dots = Q @ z
        zz = float(z @ z)
        j = int(np.argmin(dots))
        gap = zz - float(dots[j])
        if gap <= tol_abs or zz == 0.0:
            converged = True
            break
        if stop_above is not None and dots[j] > 0 and dots[j] / np.sqrt(zz) >= stop_above:
            lam = np.zeros(n)
            lam[S] = w
            return HullDistance(float(dots[j] / np.sqrt(zz)), z + x, lam, gap, lower_bound_only=True)
        if j in S:
            degenerate = True
            break
        S.append(j)
        w = np.append(w, 0.0)
        # minor cycle: move towards the affine minimizer, dropping vertices
        while True:
            mu = _affine_minimizer(Q, S)
            if mu is None:
                degenerate = True
                break
            if np.all(mu > 1e-15):
                w = mu
                break
            neg = mu <= 1e-15
            ratios = w[neg] / (w[neg] - mu[neg])
            theta = float(np.min(ratios))
            w = w + theta * (mu - w)
            keep = w > 1e-15
            S = [s for s, k in zip(S, keep) if k]
            w = w[keep]
            w = w / w.sum()
        if degenerate:
            break
        z = w @ Q[S]

    lam = np.zeros(n)
    lam[S] = w
    if not converged:
        lam, z, gap, converged, bounded = _frank_wolfe(Q, lam, tol_abs, 20 * max_iter, stop_above)
        if bounded:
            dots = Q @ z
            lb = float(dots.min() / np.linalg.norm(z))
            return HullDistance(lb, z + x, lam, gap, lower_bound_only=True)
    dist = float(np.sqrt(max(float(z @ z), 0.0)))
    return HullDistance(dist, z + x, lam, max(gap, 0.0), approximate=not converged)


def hull_distance_lower_bounds(X: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Cheap vectorized lower bounds on dist(x, conv(points)) for many x.

    Uses the separating direction from the centroid: for unit u,
    dist >= <x, u> - max_i <p_i, u>.
    """
    X = np.atleast_2d(X)
    c = points.mean(axis=0)
    u = X - c
    nu = np.linalg.norm(u, axis=1)
    safe = np.where(nu > 0, nu, 1.0)
    u = u / safe[:, None]
    support = (u @ points.T).max(axis=1)
    lb = np.einsum("ij,ij->i", X, u) - support
    return np.where(nu > 0, np.maximum(lb, 0.0), 0.0)


def hull_distance_upper_bounds(X: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Distance to the nearest point of the set, an upper bound on the hull distance."""
    X = np.atleast_2d(X)
    d2 = (np.einsum("ij,ij->i", X, X)[:, None] - 2.0 * X @ points.T
          + np.einsum("ij,ij->i", points, points)[None, :])
    return np.sqrt(np.maximum(d2.min(axis=1), 0.0))
