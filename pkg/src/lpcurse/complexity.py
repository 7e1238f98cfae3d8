"""Bound calculators for worst-case integration on isotropic bodies.

Lower side: the curse-condition predicate and the count
``(1 - eps) C^{-1} q^{-d^{alpha/2}}``.  Upper side: the error of the one-point
rule ``f -> f(0)`` over C^1_d(A, B, K), bounded by ``min(A I_1, B I_2)`` with
``I_2 = d L^2`` and ``I_1 <= sqrt(d) L``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Union

import numpy as np

from .concentration import moment_integral
from .fooling import (FoolingFunction, admissible_delta, integral_lower_bound,
                      lipschitz_certificate, random_points)
from .geometry import PBallBody
from .parallel import check_seed, map_ordered

WITNESS_THRESHOLD = 1e-12
# tail log-log slopes below this count as decay to zero
DEFAULT_DECAY_TOL = 0.2


# -- sequence specifications ----------------------------------------------------

_FACTOR = re.compile(
    r"^(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+)"
    r"|(?P<var>[dL])(?:\^(?P<exp>[+-]?[\d.eE+-]+|\([^()]*\)))?"
    r"|sqrt\((?P<sq>[dL])\))$")


def _split_top(text: str):
    """Yield (operator, factor) pairs for a product/quotient, ignoring operators inside parentheses."""
    depth, op, start = 0, "*", 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "*/" and depth == 0:
            yield op, text[start:i]
            op, start = ch, i + 1
    yield op, text[start:]


def _exponent(text: str) -> float:
    return float(Fraction(text.strip("()")))


@dataclass(frozen=True)
class SequenceSpec:
    """A sequence ``coefficient * d^d_exponent * L^L_exponent``."""

    coefficient: float
    d_exponent: float = 0.0
    L_exponent: float = 0.0

    @classmethod
    def parse(cls, text: str) -> "SequenceSpec":
        """Parse ``"a * d^s * L^t"`` and variants such as ``"1/sqrt(d)"`` or ``"2*d^(-1/2)/L"``."""
        text = (text or "").replace(" ", "")
        if not text:
            raise ValueError("empty sequence specification")
        coef, de, le = 1.0, 0.0, 0.0
        for op, tok in _split_top(text):
            m = _FACTOR.match(tok)
            if not m:
                raise ValueError(f"cannot parse factor {tok!r} in sequence specification")
            sign = -1.0 if op == "/" else 1.0
            if m.group("num") is not None:
                val = float(m.group("num"))
                coef = coef / val if sign < 0 else coef * val
                continue
            var = m.group("var") or m.group("sq")
            e = 0.5 if m.group("sq") else (_exponent(m.group("exp")) if m.group("exp") else 1.0)
            if var == "d":
                de += sign * e
            else:
                le += sign * e
        return cls(coef, de, le)

    def __call__(self, d: int, L: float) -> float:
        return self.coefficient * float(d) ** self.d_exponent * L ** self.L_exponent

    def __str__(self) -> str:
        return f"{self.coefficient!r} * d^{self.d_exponent!r} * L^{self.L_exponent!r}"


Seq = Union[SequenceSpec, Sequence[float]]


def _values(seq: Seq, bodies: Sequence[PBallBody]) -> np.ndarray:
    if isinstance(seq, SequenceSpec):
        return np.array([seq(b.d, b.L) for b in bodies])
    vals = np.asarray(seq, dtype=float)
    if vals.shape != (len(bodies),):
        raise ValueError("sequence length must match the number of bodies")
    return vals


# -- types --------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothnessClass:
    """C^1_d(A, B, K): ||f||_inf <= 1, Lip(f) <= A, Lip(D^theta f) <= B on K."""

    body: PBallBody
    A: float
    B: float
    sup_norm_cap: float = 1.0

    def __post_init__(self):
        if not (self.A > 0 and self.B > 0):
            raise ValueError("A and B must be > 0")
        if self.sup_norm_cap != 1.0:
            raise ValueError("the sup-norm cap is fixed at 1")


@dataclass(frozen=True)
class BoundParameters:
    alpha: float = 2.0
    q: float = 0.5
    C: float = 1.0
    epsilon: float = 0.1

    def __post_init__(self):
        if not 1.0 <= self.alpha <= 2.0:
            raise ValueError("alpha must lie in [1, 2]")
        if not 0.0 < self.q < 1.0:
            raise ValueError("q must lie in (0, 1)")
        if not self.C > 0:
            raise ValueError("C must be > 0")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")


# -- lower side ---------------------------------------------------------------

def curse_condition(A_seq: Seq, B_seq: Seq, bodies: Sequence[PBallBody],
                    decay_tol: float = DEFAULT_DECAY_TOL) -> dict:
    """Finite-grid reading of limsup min{A sqrt(d) L, B d L^2} > 0.

    The limsup is taken as the maximum over the upper half of the grid. A
    sequence whose tail still decays like a power (log-log slope below
    ``-decay_tol``) is read as tending to 0.
    """
    bodies = sorted(bodies, key=lambda b: b.d)
    if not bodies:
        raise ValueError("need at least one body")
    A = _values(A_seq, bodies)
    B = _values(B_seq, bodies)
    ds = np.array([b.d for b in bodies], dtype=float)
    Ls = np.array([b.L for b in bodies])
    mins = np.minimum(A * np.sqrt(ds) * Ls, B * ds * Ls ** 2)
    tail = slice(len(bodies) // 2, None)
    witness = float(mins[tail].max())
    tail_d, tail_v = ds[tail], mins[tail]
    slope = None
    if len(tail_d) >= 2 and np.unique(tail_d).size >= 2 and np.all(tail_v > 0):
        slope = float(np.polyfit(np.log(tail_d), np.log(tail_v), 1)[0])
    decaying = slope is not None and slope < -decay_tol
    return {
        "holds": witness > WITNESS_THRESHOLD and not decaying,
        "witness": witness,
        "tail_slope": slope,
        "grid": [int(d) for d in ds],
        "tail_grid": [int(d) for d in tail_d],
        "values": [float(v) for v in mins],
    }


def lower_bound_count(params: BoundParameters, d: int) -> dict:
    """(1 - eps) C^{-1} q^{-d^{alpha/2}}, as log10 and (when finite) as a number."""
    ln = math.log1p(-params.epsilon) - math.log(params.C) - d ** (params.alpha / 2.0) * math.log(params.q)
    log10 = ln / math.log(10.0)
    count = (1.0 - params.epsilon) / params.C * params.q ** -(d ** (params.alpha / 2.0)) if ln < 700 else None
    return {"log10_count": log10, "count": count}


def scaling_reduction(M: float, epsilon: float) -> float:
    """Error level M*eps at which the unscaled class answers for M times the class."""
    if not M >= 1:
        raise ValueError("M must be >= 1")
    if not 0 < epsilon < 1.0 / M:
        raise ValueError("epsilon must lie in (0, 1/M)")
    return M * epsilon


def epsilon_threshold(M: float) -> float:
    return 1.0 / (2.0 * M)


# -- upper side ---------------------------------------------------------------

def trivial_algorithm_error(cls: SmoothnessClass, mc_n: Optional[int] = None, seed: int = 0) -> dict:
    """Bounds on sup |int f - f(0)| over the class.

    ``I_1`` defaults to the bound sqrt(d) L; pass ``mc_n`` for a Monte Carlo value.
    """
    b = cls.body
    i2 = b.d * b.L ** 2
    i1 = math.sqrt(i2) if mc_n is None else moment_integral(b, 1.0, mc_n, seed).estimate
    bound_a = cls.A * i1
    bound_b = cls.B * i2
    return {"bound_A": bound_a, "bound_B": bound_b, "combined": min(bound_a, bound_b),
            "I1": i1, "I2": i2, "I1_source": "bound" if mc_n is None else "monte_carlo"}


# -- the adversary --------------------------------------------------------------

def _trial(body: PBallBody, n_points: int, delta: float, mc_n: int, seed: int, trial: int,
           certify_pairs: int) -> dict:
    tseed = (seed + 0x9E3779B97F4A7C15 * (trial + 1)) % 2**64
    pts = random_points(body, n_points, tseed)
    res = integral_lower_bound(body, pts, delta, mc_n, tseed)
    cert = lipschitz_certificate(FoolingFunction(pts, delta, body), certify_pairs, tseed)
    res["certified"] = cert["passes"]
    return res


def empirical_adversary_error(body: PBallBody, n_points: int, delta: Optional[float] = None,
                              trials: int = 4, mc_n: int = 4000, seed: int = 0,
                              certify_pairs: int = 100, details: bool = False):
    """Smallest fooling-function integral over ``trials`` random point sets.

    Each fooling function lies in C^1_d(2/(delta sqrt(d)), 40/(delta^2 d), K);
    its integral is an error the sampled rule cannot avoid.
    """
    window = admissible_delta(body)
    if delta is None:
        delta = window["default"]
    elif not 0 < delta < window["upper"]:
        raise ValueError(f"delta={delta} outside the admissible window (0, {window['upper']:.6g})")
    seed = check_seed(seed)
    runs = map_ordered(_trial, [(body, n_points, delta, mc_n, seed, t, certify_pairs)
                                for t in range(trials)])
    if not all(r["certified"] for r in runs):
        raise RuntimeError("a fooling function failed its Lipschitz certification")
    best = min(runs, key=lambda r: r["integral_estimate"])
    if details:
        return {"error": best["integral_estimate"], "stderr": best["integral_stderr"],
                "delta": delta, "trials": runs}
    return best["integral_estimate"]
