"""Closed-form geometry of volume-normalized l_p balls.

``D_p^d = B_p^d / vol(B_p^d)^{1/d}`` has unit volume. Everything here is
evaluated through log-gamma sums and differences: Gamma(1 + d/p) overflows a
double already around d = 170 at p = 1.

``p`` is a float in ``[1, inf]``; ``math.inf`` selects the cube formulas
rather than a large-p approximation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .special import EULER_GAMMA, digamma_one_plus, log_gamma, log_gamma_ratio

INF = math.inf
#: Isotropic constant of the Euclidean ball in the limit d -> infinity.
L_EUCLIDEAN_LIMIT = 1.0 / math.sqrt(2.0 * math.pi * math.e)
#: Radius threshold sqrt(2/(pi e)) of the older small-radius condition.
HNUW_RADIUS_THRESHOLD = math.sqrt(2.0 / (math.pi * math.e))
#: Upper bound for rad/(sqrt(d) L) required by the lower-bound machinery.
SMALL_DIAMETER_THRESHOLD = 2.0


def parse_p(value) -> float:
    """Accept floats and the strings 'inf', 'infinity', '∞'."""
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("inf", "infinity", "∞", "+inf"):
            return INF
        value = float(v)
    return float(value)


def _check(d: int, p: float) -> None:
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    if not (p >= 1):
        raise ValueError(f"p must lie in [1, inf], got {p!r}")


def log_volume_ball(d: int, p: float) -> float:
    """ln vol(B_p^d) = d ln 2 + d lnGamma(1 + 1/p) - lnGamma(1 + d/p)."""
    _check(d, p)
    if math.isinf(p):
        return d * math.log(2.0)
    return d * math.log(2.0) + d * log_gamma(1.0 + 1.0 / p) - log_gamma(1.0 + d / p)


def log_alpha(d: int, p: float) -> float:
    return -log_volume_ball(d, p) / d


def alpha(d: int, p: float) -> float:
    """Scale factor alpha_{d,p} = vol(B_p^d)^{-1/d}, so D_p^d = alpha B_p^d."""
    return math.exp(log_alpha(d, p))


def gamma2(d: int, p: float) -> float:
    """Normalized second moment of x_1 over B_p^d."""
    _check(d, p)
    if math.isinf(p):
        return 1.0 / 3.0
    # Gamma(1 + d/p) / Gamma((d + 2)/p) as one ratio: its log-gammas nearly cancel
    log_val = math.fsum([
        math.log(p / (3.0 * (d + 2))),
        log_gamma(1.0 + 3.0 / p) - log_gamma(1.0 + 1.0 / p),
        -log_gamma_ratio(1.0 + d / p, 2.0 / p - 1.0),
    ])
    return math.exp(log_val)


def gamma2_lower_bound(d: int, p: float) -> float:
    """Gautschi-type lower bound on gamma2(d, p), valid for p >= 2."""
    _check(d, p)
    if p < 2:
        raise ValueError("the lower bound needs p >= 2")
    if math.isinf(p):
        return d / (3.0 * (d + 2))
    log_val = (
        math.log(d / (3.0 * (d + 2)))
        + log_gamma(1.0 + 3.0 / p)
        - log_gamma(1.0 + 1.0 / p)
        + (2.0 / p) * math.log(p / d)
    )
    return math.exp(log_val)


def isotropic_constant(d: int, p: float) -> float:
    return alpha(d, p) * math.sqrt(gamma2(d, p))


def radius_unit_ball(d: int, p: float) -> float:
    """Euclidean radius of B_p^d."""
    _check(d, p)
    expo = 0.5 if math.isinf(p) else max(0.5 - 1.0 / p, 0.0)
    return d ** expo


def radius(d: int, p: float) -> float:
    return alpha(d, p) * radius_unit_ball(d, p)


def radius_ratio(d: int, p: float) -> float:
    """rad(D_p^d) / (sqrt(d) L) = d^{-1/p} / gamma_{d,p}; only for p >= 2."""
    _check(d, p)
    if p < 2:
        raise ValueError("radius_ratio is defined here only for p >= 2")
    if math.isinf(p):
        return math.sqrt(3.0)
    return math.exp(-math.log(d) / p - 0.5 * math.log(gamma2(d, p)))


def radius_ratio_limit_bound(p: float) -> float:
    """sqrt(3) * sqrt(h(p)), the large-d bound on radius_ratio for p >= 2."""
    return math.sqrt(3.0 * h_ratio(p))


def small_diameter_check(d: int, p: float) -> dict:
    """Evaluate both radial conditions at (d, p).

    ``passes_paper_condition`` is rad/(sqrt(d) L) < 2 and
    ``passes_HNUW_condition`` is rad/sqrt(d) < sqrt(2/(pi e)).
    """
    ratio = radius_ratio(d, p)
    rad_over_sqrt_d = radius(d, p) / math.sqrt(d)
    return {
        "ratio": ratio,
        "radius_over_sqrt_d": rad_over_sqrt_d,
        "passes_paper_condition": ratio < SMALL_DIAMETER_THRESHOLD,
        "passes_HNUW_condition": rad_over_sqrt_d < HNUW_RADIUS_THRESHOLD,
    }


def radius_over_sqrt_d_limit(p: float) -> float:
    """lim_{d->inf} rad(D_p^d)/sqrt(d) for p >= 2 (Stirling on Gamma(1+d/p)^{1/d})."""
    if math.isinf(p):
        return 0.5
    return math.exp(-math.log(p * math.e) / p - math.log(2.0) - log_gamma(1.0 + 1.0 / p))


def hnuw_threshold_p(lo: float = 2.0, hi: float = 1.0e4) -> float:
    """Exponent p_0 above which the small-radius condition fails asymptotically."""
    return brentq(lambda p: radius_over_sqrt_d_limit(p) - HNUW_RADIUS_THRESHOLD, lo, hi, xtol=1e-12)


@dataclass(frozen=True)
class PBallBody:
    """The volume-normalized ball D_p^d with its derived constants cached."""

    d: int
    p: float
    log_volume: float = field(init=False)
    alpha: float = field(init=False)
    gamma2: float = field(init=False)
    L: float = field(init=False)
    radius: float = field(init=False)

    def __post_init__(self):
        p = parse_p(self.p)
        object.__setattr__(self, "p", p)
        _check(self.d, p)
        object.__setattr__(self, "d", int(self.d))
        lv = log_volume_ball(self.d, p)
        a = math.exp(-lv / self.d)
        g2 = gamma2(self.d, p)
        object.__setattr__(self, "log_volume", lv)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "gamma2", g2)
        object.__setattr__(self, "L", a * math.sqrt(g2))
        object.__setattr__(self, "radius", a * radius_unit_ball(self.d, p))

    @property
    def is_cube(self) -> bool:
        return math.isinf(self.p)

    @property
    def radius_ratio(self) -> float:
        """rad/(sqrt(d) L), valid for every p (uses the cached radius)."""
        return self.radius / (math.sqrt(self.d) * self.L)

    def norm(self, x: np.ndarray) -> np.ndarray:
        """l_p norm along the last axis, overflow-safe for large p."""
        x = np.abs(np.asarray(x, dtype=float))
        if self.is_cube:
            return x.max(axis=-1)
        m = x.max(axis=-1, keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        s = np.sum((x / safe) ** self.p, axis=-1)
        return m[..., 0] * s ** (1.0 / self.p)

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        return self.norm(x) <= self.alpha + tol

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "p": self.p,
            "log_volume": self.log_volume,
            "alpha": self.alpha,
            "gamma2": self.gamma2,
            "L": self.L,
            "radius": self.radius,
        }


# -- monotonicity certificate -------------------------------------------------

def h_ratio(p: float) -> float:
    """h(p) = Gamma(1+1/p)/Gamma(1+3/p) * p^{-2/p}; equals 1 at p = inf."""
    if math.isinf(p):
        return 1.0
    return math.exp(log_gamma(1.0 + 1.0 / p) - log_gamma(1.0 + 3.0 / p) - (2.0 / p) * math.log(p))


def f_derivative(x: float) -> float:
    """3 psi(1+3x) - psi(1+x) - 2 ln x - 2, the derivative of ln h in x = 1/p."""
    return 3.0 * digamma_one_plus(3.0 * x) - digamma_one_plus(x) - 2.0 * math.log(x) - 2.0


def g_minorant(x: float) -> float:
    """-2 ln x + 3 ln(1+3x) - ln(1+x)."""
    return -2.0 * math.log(x) + 3.0 * math.log1p(3.0 * x) - math.log1p(x)


@dataclass
class MonotonicityReport:
    p_grid: np.ndarray
    h: np.ndarray
    h_increasing: bool
    first_violation: Optional[float]
    f_min: float
    f_positive: bool
    g_min: float
    g_threshold: float
    g_exceeds_threshold: bool
    g_at_large_x: float
    g_limit: float

    @property
    def ok(self) -> bool:
        return self.h_increasing and self.f_positive and self.g_exceeds_threshold

    def summary(self) -> dict:
        return {
            "p_min": float(self.p_grid[0]),
            "p_max": float(self.p_grid[-1]),
            "grid": int(len(self.p_grid)),
            "h_increasing": self.h_increasing,
            "first_violation": self.first_violation,
            "f_min": self.f_min,
            "f_positive": self.f_positive,
            "g_min": self.g_min,
            "g_threshold": self.g_threshold,
            "g_exceeds_threshold": self.g_exceeds_threshold,
            "g_at_large_x": self.g_at_large_x,
            "g_limit": self.g_limit,
            "ok": self.ok,
        }


def monotonicity_certificate(p_min: float = 2.0, p_max: float = 1.0e4, grid: int = 200) -> MonotonicityReport:
    """Check on a log-spaced grid that h(p) increases and that f, g stay above their bounds."""
    if not (2.0 <= p_min < p_max) or grid < 2:
        raise ValueError("need 2 <= p_min < p_max and grid >= 2")
    ps = np.geomspace(p_min, p_max, grid)
    h = np.array([h_ratio(float(p)) for p in ps])
    steps = np.diff(h)
    bad = np.nonzero(steps <= 0)[0]
    first = float(ps[bad[0] + 1]) if bad.size else None
    xs = 1.0 / ps
    f_vals = np.array([f_derivative(float(x)) for x in xs])
    g_vals = np.array([g_minorant(float(x)) for x in xs])
    threshold = 2.0 * EULER_GAMMA + 2.0
    return MonotonicityReport(
        p_grid=ps,
        h=h,
        h_increasing=not bad.size,
        first_violation=first,
        f_min=float(f_vals.min()),
        f_positive=bool(np.all(f_vals > 0)),
        g_min=float(g_vals.min()),
        g_threshold=threshold,
        g_exceeds_threshold=bool(np.all(g_vals > threshold)),
        g_at_large_x=g_minorant(1.0e12),
        g_limit=math.log(27.0),
    )


def gautschi_gap(x, lam):
    """ln[Gamma(x+1)/Gamma(x+lam)] - (1-lam) ln x; nonnegative by Gautschi's inequality."""
    x = np.asarray(x, dtype=float)
    return log_gamma(x + 1.0) - log_gamma(x + lam) - (1.0 - lam) * np.log(x)
