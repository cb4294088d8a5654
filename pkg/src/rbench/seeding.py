"""
Deterministic RNG stream splitting.

Every random draw in a run comes from a child generator keyed by
``(master_seed, role tag, *indices)``. The key is turned into entropy for
``numpy.random.SeedSequence`` as::

    [master_seed, crc32(tag as UTF-8), index_0, index_1, ...]

and fed to PCG64 via ``numpy.random.default_rng``. Draws therefore depend
only on the key, never on worker count or job ordering.
"""

from __future__ import annotations

import zlib

import numpy as np


def tag_id(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8"))


def seed_sequence(master_seed: int, tag: str, *indices: int) -> np.random.SeedSequence:
    if master_seed < 0 or any(i < 0 for i in indices):
        raise ValueError("seeds and indices must be non-negative")
    return np.random.SeedSequence([int(master_seed), tag_id(tag), *(int(i) for i in indices)])


def child_rng(master_seed: int, tag: str, *indices: int) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(master_seed, tag, *indices))
