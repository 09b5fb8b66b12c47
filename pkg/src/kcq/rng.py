"""Reproducible random streams.

Every Monte Carlo routine in the package draws from Philox streams keyed by
``(seed, tag, block)``.  Trials are cut into fixed blocks of ``BLOCK_SIZE``;
block ``b`` of an experiment tagged ``tag`` always uses the same stream, so the
statistics do not depend on how many workers process the blocks or in what
order.
"""
from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

BLOCK_SIZE = 1 << 16
_MASK64 = (1 << 64) - 1

T = TypeVar("T")


def _tag_word(tag: str | int) -> int:
    if isinstance(tag, int):
        return tag & 0xFFFFFFFF
    return zlib.crc32(tag.encode("utf-8"))


def stream(seed: int, tag: str | int = 0, index: int = 0) -> np.random.Generator:
    """Philox generator for the ``index``-th block of stream ``tag``."""
    ss = np.random.SeedSequence(entropy=int(seed) & _MASK64,
                                spawn_key=(_tag_word(tag), int(index)))
    return np.random.Generator(np.random.Philox(ss))


def blocks(total: int, block_size: int = BLOCK_SIZE) -> list[tuple[int, int]]:
    """Split ``total`` trials into ``(block_index, count)`` pairs."""
    out = []
    start = 0
    b = 0
    while start < total:
        n = min(block_size, total - start)
        out.append((b, n))
        start += n
        b += 1
    return out


def map_blocks(fn: Callable[[int, int], T], total: int, jobs: int = 1,
               block_size: int = BLOCK_SIZE) -> list[T]:
    """Apply ``fn(block_index, count)`` to every block; results in block order.

    Worker threads only change wall time; each block owns its own stream so the
    returned list is identical for any ``jobs``.
    """
    work = blocks(total, block_size)
    if jobs <= 1 or len(work) <= 1:
        return [fn(b, n) for b, n in work]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda bn: fn(*bn), work))


def as_generator(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(0 if rng is None else rng)
