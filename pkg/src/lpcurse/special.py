"""Log-gamma and digamma.

``log_gamma`` is a thin wrapper over ``scipy.special.gammaln``. ``digamma``
sums the classical series

    psi(1 + x) = -gamma + sum_{k>=1} x / (k (k + x))

with compensated summation and an Euler-Maclaurin tail, so that the
monotonicity certificate in :mod:`lpcurse.geometry` can be audited term by
term.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

EULER_GAMMA = 0.57721566490153286060651209008240243

# Bernoulli numbers B_2, B_4, B_6, B_8 for the Euler-Maclaurin tail.
_BERNOULLI = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0)

# Beyond this argument the asymptotic expansion is used instead of the series.
_ASYMPTOTIC_FROM = 1.0e4
_SERIES_TOL = 1.0e-13


def _check_positive(x):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError("argument must be > 0")
    return arr


def log_gamma(x):
    """Natural log of Gamma(x) for x > 0 (scalar or array)."""
    arr = _check_positive(x)
    out = _sp.gammaln(arr)
    return float(out) if out.ndim == 0 else out


# ln Gamma(x + m) - ln Gamma(x) switches to its asymptotic series from here on
_RATIO_ASYMPTOTIC_FROM = 30.0
_RATIO_TERMS = 14


def _bernoulli_poly(n: int, a: float) -> float:
    b = _sp.bernoulli(n)
    return math.fsum(math.comb(n, k) * b[k] * a ** (n - k) for k in range(n + 1))


def log_gamma_ratio(x: float, m: float) -> float:
    """ln Gamma(x + m) - ln Gamma(x) without cancellation for large x.

    Uses ``m ln x + sum_k (-1)^{k+1} (B_{k+1}(m) - B_{k+1}) / (k (k+1) x^k)``
    when x and x + m are both large, and a plain difference of log-gammas
    otherwise.
    """
    if m == 0:
        return 0.0
    if not (x > 0 and x + m > 0):
        raise ValueError("x and x + m must be > 0")
    if min(x, x + m) < _RATIO_ASYMPTOTIC_FROM or abs(m) > 4.0:
        return float(_sp.gammaln(x + m) - _sp.gammaln(x))
    b = _sp.bernoulli(_RATIO_TERMS + 1)
    terms = [m * math.log(x)]
    for k in range(1, _RATIO_TERMS + 1):
        diff = _bernoulli_poly(k + 1, m) - b[k + 1]
        terms.append((-1) ** (k + 1) * diff / (k * (k + 1) * x ** k))
    return math.fsum(terms)


def _tail(x: float, n: int) -> float:
    """Euler-Maclaurin estimate of sum_{k>n} (1/k - 1/(k+x))."""
    g = 1.0 / n - 1.0 / (n + x)
    total = math.log1p(x / n) - 0.5 * g
    for j, b in enumerate(_BERNOULLI, start=1):
        m = 2 * j - 1
        # g^{(m)}(k) = (-1)^m m! (k^{-m-1} - (k+x)^{-m-1}), m odd
        deriv = -math.factorial(m) * (n ** (-m - 1) - (n + x) ** (-m - 1))
        total -= b / math.factorial(2 * j) * deriv
    return total


def _truncation(x: float) -> int:
    # The first omitted Euler-Maclaurin term is O(x * 10! / N^11); N >= 20x
    # keeps it far below _SERIES_TOL for every x handled by the series.
    return max(64, int(math.ceil(20.0 * x)))


def digamma_one_plus(x: float) -> float:
    """psi(1 + x) for x >= 0 from the series, with compensated summation."""
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0:
        return -EULER_GAMMA
    if x + 1.0 >= _ASYMPTOTIC_FROM:
        return _digamma_asymptotic(x + 1.0)
    n = _truncation(x)
    k = np.arange(1, n + 1, dtype=float)
    terms = x / (k * (k + x))
    return math.fsum(terms.tolist()) + _tail(x, n) - EULER_GAMMA


def _digamma_asymptotic(x: float) -> float:
    inv2 = 1.0 / (x * x)
    s = inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 / 132))))
    return math.log(x) - 0.5 / x - s


def digamma(x):
    """Digamma psi(x) for x > 0 (scalar or array)."""
    arr = _check_positive(x)
    flat = arr.reshape(-1)
    out = np.empty_like(flat)
    for i, v in enumerate(flat):
        v = float(v)
        if v >= _ASYMPTOTIC_FROM:
            out[i] = _digamma_asymptotic(v)
        elif v >= 1.0:
            out[i] = digamma_one_plus(v - 1.0)
        else:
            # psi(x) = psi(1 + x) - 1/x
            out[i] = digamma_one_plus(v) - 1.0 / v
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out
