"""Chunked, seed-derived random streams.

A job of ``n`` rows is cut into chunks of ``CHUNK_ROWS`` rows. Chunk ``i``
draws from a Philox generator keyed by ``(seed, stream, i)``, so results do
not depend on how many workers process the chunks. ``LPCURSE_WORKERS`` sets
the thread count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, List, Sequence, Tuple, TypeVar

import numpy as np

CHUNK_ROWS = 1 << 14
WORKERS_ENV = "LPCURSE_WORKERS"

T = TypeVar("T")


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return seed


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def chunk_sizes(n: int, chunk: int = CHUNK_ROWS) -> List[int]:
    if n < 1:
        raise ValueError("n must be >= 1")
    full, rest = divmod(n, chunk)
    return [chunk] * full + ([rest] if rest else [])


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_ordered(fn: Callable[..., T], args: Sequence[Tuple], workers: int | None = None) -> List[T]:
    """``[fn(*a) for a in args]``, optionally on a thread pool; order is preserved."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda a: fn(*a), args))


def map_chunks(fn: Callable[[np.random.Generator, int], T], n: int, seed: int,
               stream_id: int = 0, workers: int | None = None) -> List[T]:
    """Apply ``fn(rng, rows)`` to every chunk of an ``n``-row job."""
    sizes = chunk_sizes(n)
    args = [(stream(seed, stream_id, i), m) for i, m in enumerate(sizes)]
    return map_ordered(fn, args, workers)


def iter_chunks(n: int, seed: int, stream_id: int = 0) -> Iterator[Tuple[np.random.Generator, int]]:
    for i, m in enumerate(chunk_sizes(n)):
        yield stream(seed, stream_id, i), m
