"""Exact samplers for l_p balls.

For p < inf the cone measure on the unit l_p sphere is the law of
``G / ||G||_p`` where G has i.i.d. coordinates with density
``exp(-|t|^p) / (2 Gamma(1 + 1/p))``; a uniform point of B_p^d is
``U^{1/d} G / ||G||_p``. For p = inf every coordinate is uniform on [-1, 1].

All samplers work chunk by chunk (see :mod:`lpcurse.parallel`), so a batch of
``n`` points is the concatenation of the same chunks any Monte Carlo reducer
in :mod:`lpcurse.concentration` sees for the same seed.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator, Tuple

import numpy as np
from scipy.special import logsumexp

from .geometry import PBallBody
from .parallel import check_seed, map_chunks, stream

CONE = "cone"
UNIFORM_BALL = "uniform_ball"
UNIFORM_NORMALIZED = "uniform_normalized"
ISOTROPIC = "isotropic_rescaled"
MEASURES = (CONE, UNIFORM_BALL, UNIFORM_NORMALIZED, ISOTROPIC)

_HEADER = struct.Struct("<QQ")


# -- gamma variates -----------------------------------------------------------

def _marsaglia_tsang_log(rng: np.random.Generator, shape: float, size: int) -> np.ndarray:
    """log of Gamma(shape, 1) variates for shape >= 1 (Marsaglia-Tsang squeeze-free)."""
    dd = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * dd)
    out = np.empty(size)
    filled = 0
    while filled < size:
        m = max(16, int(1.1 * (size - filled)) + 8)
        x = rng.standard_normal(m)
        u = rng.random(m)
        v = 1.0 + c * x
        ok = v > 0
        v3 = np.where(ok, v, 1.0) ** 3
        with np.errstate(divide="ignore"):
            accept = ok & (np.log(u) < 0.5 * x * x + dd - dd * v3 + dd * np.log(v3))
        take = np.log(dd * v3[accept])[: size - filled]
        out[filled:filled + take.size] = take
        filled += take.size
    return out


def log_standard_gamma(rng: np.random.Generator, shape: float, size: int) -> np.ndarray:
    """log W for W ~ Gamma(shape, 1), any shape > 0.

    Shapes below one use the boost ``W = W' U^{1/shape}`` with W' ~ Gamma(shape + 1);
    working with logs keeps tiny shapes (large p) from underflowing.
    """
    if not shape > 0:
        raise ValueError("shape must be > 0")
    if shape >= 1.0:
        return _marsaglia_tsang_log(rng, shape, size)
    base = _marsaglia_tsang_log(rng, shape + 1.0, size)
    u = rng.random(size)
    # rng.random() can return exactly 0.0
    u = np.where(u > 0, u, np.finfo(float).tiny)
    return base + np.log(u) / shape


def _signs(rng: np.random.Generator, shape) -> np.ndarray:
    return np.where(rng.integers(0, 2, size=shape, dtype=np.int8) == 1, 1.0, -1.0)


def _gen_gauss_chunk(rng: np.random.Generator, p: float, m: int) -> np.ndarray:
    log_w = log_standard_gamma(rng, 1.0 / p, m)
    return _signs(rng, m) * np.exp(log_w / p)


def sample_generalized_gaussian(p: float, n: int, seed: int) -> np.ndarray:
    """I.i.d. draws with density exp(-|t|^p) / (2 Gamma(1 + 1/p))."""
    if math.isinf(p):
        raise ValueError("p = inf has no generalized Gaussian; sample the cube directly")
    if not p >= 1:
        raise ValueError("p must be >= 1")
    parts = map_chunks(lambda rng, m: _gen_gauss_chunk(rng, p, m), n, seed, stream_id=1)
    return np.concatenate(parts)


# -- chunk kernels ------------------------------------------------------------

def _cone_chunk(rng: np.random.Generator, body: PBallBody, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """Rows on the unit l_p sphere plus the l_p norms of the underlying G."""
    p, d = body.p, body.d
    log_w = log_standard_gamma(rng, 1.0 / p, m * d).reshape(m, d)
    signs = _signs(rng, (m, d))
    # |g_i|^p = W_i, so ||G||_p^p = sum W_i
    log_s = logsumexp(log_w, axis=1, keepdims=True)
    y = signs * np.exp((log_w - log_s) / p)
    return y, np.exp(log_s[:, 0] / p)


def _uniform_chunk(rng: np.random.Generator, body: PBallBody, m: int) -> np.ndarray:
    """Uniform rows in the unit ball B_p^d."""
    if body.is_cube:
        return rng.uniform(-1.0, 1.0, size=(m, body.d))
    y, _ = _cone_chunk(rng, body, m)
    u = rng.random(m)
    u = np.where(u > 0, u, np.finfo(float).tiny)
    return y * np.exp(np.log(u) / body.d)[:, None]


def _scale(body: PBallBody, measure: str) -> float:
    if measure == UNIFORM_BALL:
        return 1.0
    if measure == UNIFORM_NORMALIZED:
        return body.alpha
    if measure == ISOTROPIC:
        return body.alpha / body.L
    raise ValueError(f"unknown measure {measure!r}")


def chunk_kernel(body: PBallBody, measure: str) -> Callable[[np.random.Generator, int], np.ndarray]:
    """``kernel(rng, rows)`` producing one chunk of ``measure`` on ``body``."""
    if measure == CONE:
        if body.is_cube:
            raise ValueError("cone sampling needs p < inf")
        return lambda rng, m: _cone_chunk(rng, body, m)[0]
    scale = _scale(body, measure)
    return lambda rng, m: _uniform_chunk(rng, body, m) * scale


def iter_sample_chunks(body: PBallBody, measure: str, n: int, seed: int,
                       workers: int | None = None) -> Iterator[np.ndarray]:
    kernel = chunk_kernel(body, measure)
    yield from map_chunks(kernel, n, seed, workers=workers)


# -- batches ------------------------------------------------------------------

@dataclass(frozen=True)
class SampleBatch:
    body: PBallBody
    measure: str
    points: np.ndarray
    seed: int

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    def to_csv(self, path) -> None:
        np.savetxt(path, self.points, delimiter=",", fmt="%.17g")

    def to_binary(self, path) -> None:
        write_binary(path, self.points)


def _batch(body: PBallBody, measure: str, n: int, seed: int) -> SampleBatch:
    seed = check_seed(seed)
    pts = np.concatenate(list(iter_sample_chunks(body, measure, n, seed)), axis=0)
    return SampleBatch(body=body, measure=measure, points=pts, seed=seed)


def sample_cone(body: PBallBody, n: int, seed: int) -> SampleBatch:
    """Cone measure on the unit l_p sphere (p < inf)."""
    return _batch(body, CONE, n, seed)


def cone_with_radii(body: PBallBody, n: int, seed: int) -> Tuple[SampleBatch, np.ndarray]:
    """Cone batch together with ||G||_p for each row, for independence checks."""
    if body.is_cube:
        raise ValueError("cone sampling needs p < inf")
    parts = map_chunks(lambda rng, m: _cone_chunk(rng, body, m), n, seed)
    pts = np.concatenate([y for y, _ in parts], axis=0)
    radii = np.concatenate([r for _, r in parts])
    return SampleBatch(body, CONE, pts, check_seed(seed)), radii


def sample_uniform(body: PBallBody, n: int, seed: int, normalized: bool = True) -> SampleBatch:
    """Uniform points in D_p^d (``normalized``) or in B_p^d."""
    return _batch(body, UNIFORM_NORMALIZED if normalized else UNIFORM_BALL, n, seed)


def sample_isotropic(body: PBallBody, n: int, seed: int) -> SampleBatch:
    """Uniform points of D_p^d divided by L; mean 0 and identity covariance."""
    return _batch(body, ISOTROPIC, n, seed)


def sample(body: PBallBody, measure: str, n: int, seed: int) -> SampleBatch:
    if measure not in MEASURES:
        raise ValueError(f"measure must be one of {MEASURES}")
    return _batch(body, measure, n, seed)


# -- file formats -------------------------------------------------------------

def write_binary(path, points: np.ndarray) -> None:
    """16-byte header (d, n as little-endian uint64) then row-major float64 LE."""
    pts = np.ascontiguousarray(points, dtype="<f8")
    n, d = pts.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(d, n))
        fh.write(pts.tobytes(order="C"))


def read_binary(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    d, n = _HEADER.unpack_from(raw, 0)
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != n * d:
        raise ValueError(f"payload holds {body.size} values, header says {n}x{d}")
    return body.reshape(n, d).astype(float)


def load_points_csv(path) -> np.ndarray:
    """Point set from CSV: one point per row, d columns."""
    pts = np.loadtxt(path, delimiter=",", ndmin=2)
    if pts.size == 0:
        raise ValueError(f"no points in {path}")
    return pts
