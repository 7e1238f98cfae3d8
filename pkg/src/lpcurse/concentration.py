"""Monte Carlo experiments on volume concentration in D_p^d.

Every estimator streams chunks from :mod:`lpcurse.sampling`, reduces each
chunk to counts and sums, and merges them in chunk order. Results are a
deterministic function of (body, parameters, seed).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .geometry import PBallBody
from .parallel import map_chunks
from .sampling import ISOTROPIC, UNIFORM_NORMALIZED, chunk_kernel

UPPER = "upper"
LOWER = "lower"


class ZeroTailWarning(UserWarning):
    """An empirical tail probability was 0, i.e. below Monte Carlo resolution."""


@dataclass(frozen=True)
class Estimate:
    estimate: float
    stderr: float

    def to_dict(self) -> dict:
        return asdict(self)


def _reduce(body: PBallBody, measure: str, n: int, seed: int, stat, workers=None) -> List:
    kernel = chunk_kernel(body, measure)
    return map_chunks(lambda rng, m: stat(kernel(rng, m)), n, seed, workers=workers)


def _mean_estimate(parts: Sequence, n: int) -> Estimate:
    s = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s / n
    var = max(s2 / n - mean * mean, 0.0)
    return Estimate(mean, math.sqrt(var / n))


def _proportion(count: int, n: int) -> Estimate:
    p = count / n
    return Estimate(p, math.sqrt(p * (1.0 - p) / n))


# -- intersections and moments ------------------------------------------------

def intersection_volume(body: PBallBody, r: float, n: int, seed: int, workers=None) -> Estimate:
    """vol(D_p^d ∩ r sqrt(d) B_2^d) as the fraction of uniform points of norm <= r sqrt(d)."""
    if r < 0:
        raise ValueError("r must be >= 0")
    cut = r * math.sqrt(body.d)
    if r == 0:
        return Estimate(0.0, 0.0)
    if cut >= body.radius:
        return Estimate(1.0, 0.0)
    parts = _reduce(body, UNIFORM_NORMALIZED, n, seed,
                    lambda x: int(np.count_nonzero(np.linalg.norm(x, axis=1) <= cut)), workers)
    return _proportion(sum(parts), n)


def moment_integral(body: PBallBody, q: float, n: int, seed: int, workers=None) -> Estimate:
    """I_q = integral of ||x||_2^q over D_p^d (a unit-volume body, so a plain mean)."""
    if q < 0:
        raise ValueError("q must be >= 0")
    if q == 0:
        return Estimate(1.0, 0.0)

    def stat(x):
        v = np.linalg.norm(x, axis=1) ** q
        return float(v.sum()), float(v @ v)

    return _mean_estimate(_reduce(body, UNIFORM_NORMALIZED, n, seed, stat, workers), n)


# -- psi_alpha norms ----------------------------------------------------------

@dataclass(frozen=True)
class PsiNormEstimate:
    lam: float
    l2_norm: float
    constant: float


def _log_orlicz_mean(y_abs: np.ndarray, lam: float, alpha: float) -> float:
    return float(logsumexp((y_abs / lam) ** alpha) - math.log(y_abs.size))


def empirical_psi_norm(body: PBallBody, theta, alpha: float, n: int, seed: int,
                       rel_tol: float = 1e-6, workers=None) -> PsiNormEstimate:
    """Empirical psi_alpha Orlicz norm of <x, theta> under the uniform law on D_p^d.

    ``constant`` is the norm divided by the empirical L2 norm of <x, theta>.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (body.d,):
        raise ValueError(f"theta must have shape ({body.d},)")
    if abs(np.linalg.norm(theta) - 1.0) > 1e-10:
        raise ValueError("theta must be a unit vector")
    if not 1.0 <= alpha <= 2.0:
        raise ValueError("alpha must lie in [1, 2]")
    parts = _reduce(body, UNIFORM_NORMALIZED, n, seed, lambda x: x @ theta, workers)
    y = np.abs(np.concatenate(parts))
    l2 = math.sqrt(float(np.mean(y * y)))
    log2 = math.log(2.0)

    hi = 1.0e3 * l2
    if _log_orlicz_mean(y, hi, alpha) > log2:
        raise RuntimeError("Orlicz mean exceeds 2 at the bracket cap; increase n")
    lo = float(y.max()) / log2 ** (1.0 / alpha) / 10.0
    while _log_orlicz_mean(y, lo, alpha) <= log2:
        lo /= 2.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if _log_orlicz_mean(y, mid, alpha) <= log2:
            hi = mid
        else:
            lo = mid
    return PsiNormEstimate(lam=hi, l2_norm=l2, constant=hi / l2)


# -- thin shell -----------------------------------------------------------------

@dataclass(frozen=True)
class TailRow:
    t: float
    side: str
    probability: float
    stderr: float
    below_resolution: bool = False
    # for below-resolution rows the probability is only known to be < resolution
    resolution: Optional[float] = None


@dataclass
class ConcentrationReport:
    body: PBallBody
    n: int
    seed: int
    mean_norm_ratio: float
    mean_norm_ratio_stderr: float
    eta: float
    b_alpha: float
    alpha: float
    tail_table: List[TailRow] = field(default_factory=list)

    def tail(self, t: float, side: str) -> TailRow:
        for row in self.tail_table:
            if row.t == t and row.side == side:
                return row
        raise KeyError((t, side))

    def to_dict(self) -> dict:
        return {
            "body": self.body.to_dict(),
            "n": self.n,
            "seed": self.seed,
            "mean_norm_ratio": self.mean_norm_ratio,
            "mean_norm_ratio_stderr": self.mean_norm_ratio_stderr,
            "eta": self.eta,
            "b_alpha": self.b_alpha,
            "alpha": self.alpha,
            "tail_table": [asdict(r) for r in self.tail_table],
        }

    def csv_rows(self) -> List[dict]:
        return [
            {"d": self.body.d, "p": self.body.p, "t": r.t, "side": r.side,
             "probability": r.probability, "stderr": r.stderr,
             "below_resolution": r.below_resolution}
            for r in self.tail_table
        ]


def thin_shell_report(body: PBallBody, t_grid: Sequence[float], n: int, seed: int,
                      alpha: float = 2.0, b_alpha: Optional[float] = None,
                      psi_n: int = 100_000, workers=None) -> ConcentrationReport:
    """Tail probabilities of ||X||_2 around sqrt(d) for X uniform on D_p^d / L.

    Upper rows are P(||X|| >= (1+t) sqrt(d)); lower rows, for t in [0, 1], are
    P(||X|| <= (1-t) sqrt(d)). ``eta = d / b_alpha^2`` with the identity
    matrix; ``b_alpha`` defaults to the empirical psi_alpha constant along e_1.
    """
    t_grid = [float(t) for t in t_grid]
    if any(t < 0 for t in t_grid):
        raise ValueError("t values must be >= 0")
    if n < 10_000:
        raise ValueError("thin-shell reports need n >= 1e4")
    d = body.d
    root_d = math.sqrt(d)
    lower_ts = [t for t in t_grid if t <= 1.0]
    up_cuts = np.array([(1.0 + t) * root_d for t in t_grid])
    low_cuts = np.array([(1.0 - t) * root_d for t in lower_ts])

    def stat(x):
        r = np.linalg.norm(x, axis=1)
        ratio = r / root_d
        up = (r[:, None] >= up_cuts[None, :]).sum(axis=0)
        low = (r[:, None] <= low_cuts[None, :]).sum(axis=0)
        return float(ratio.sum()), float(ratio @ ratio), up, low

    parts = _reduce(body, ISOTROPIC, n, seed, stat, workers)
    mean = _mean_estimate(parts, n)
    up_counts = np.sum([p[2] for p in parts], axis=0)
    low_counts = np.sum([p[3] for p in parts], axis=0) if lower_ts else []

    rows: List[TailRow] = []
    for side, ts, counts in ((UPPER, t_grid, up_counts), (LOWER, lower_ts, low_counts)):
        for t, c in zip(ts, counts):
            est = _proportion(int(c), n)
            if c == 0:
                warnings.warn(
                    f"{side} tail at t={t} (d={d}, p={body.p}) is below Monte Carlo resolution 1/{n}",
                    ZeroTailWarning, stacklevel=2)
                rows.append(TailRow(t, side, 0.0, 0.0, True, 1.0 / n))
            else:
                rows.append(TailRow(t, side, est.estimate, est.stderr))

    if b_alpha is None:
        e1 = np.zeros(d)
        e1[0] = 1.0
        b_alpha = empirical_psi_norm(body, e1, alpha, min(n, psi_n), seed, workers=workers).constant
    eta = d / b_alpha ** 2
    return ConcentrationReport(body, n, seed, mean.estimate, mean.stderr, eta, b_alpha, alpha, rows)


# -- decay fits ---------------------------------------------------------------

def fit_decay(ds: Sequence[int], values: Sequence[float], alpha: float = 2.0) -> dict:
    """Least-squares fit ln v = ln C + d^{alpha/2} ln q over positive values.

    Returned as data only; the absolute constants are not identifiable at
    desk scale.
    """
    ds = np.asarray(ds, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = v > 0
    if keep.sum() < 2:
        raise ValueError("need at least two positive values to fit a decay")
    x = ds[keep] ** (alpha / 2.0)
    slope, intercept = np.polyfit(x, np.log(v[keep]), 1)
    return {"slope": float(slope), "q": float(math.exp(slope)), "C": float(math.exp(intercept)),
            "alpha": alpha, "points": int(keep.sum())}
