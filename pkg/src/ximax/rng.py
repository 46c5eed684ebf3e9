"""Deterministic keyed random streams.

Every random draw in the package comes from a counter-based Philox stream
keyed by (seed, domain, index). Work units (a bootstrap replication, a data
column, a synthetic replicate) each own a stream, so results are identical
no matter how the work is split across workers or in what order it runs.
"""

from __future__ import annotations

import numpy as np

# Domain tags keep independent uses of the same user seed from colliding.
MULTIPLIERS = 1
JITTER = 2
MODEL = 3
STUDY = 4
MOMENTS = 5

_INDEX_BITS = 56
_MASK64 = (1 << 64) - 1


def keyed_rng(seed: int, domain: int, index: int) -> np.random.Generator:
    """Generator for the stream keyed by (seed, domain, index)."""
    if not 0 <= index < (1 << _INDEX_BITS):
        raise ValueError(f"stream index out of range: {index}")
    if not 0 < domain < (1 << (64 - _INDEX_BITS)):
        raise ValueError(f"bad domain tag: {domain}")
    key = np.array(
        [int(seed) & _MASK64, (domain << _INDEX_BITS) | index], dtype=np.uint64
    )
    return np.random.Generator(np.random.Philox(key=key))


def derive_seed(seed: int, domain: int, index: int) -> int:
    """A fresh 63-bit seed deterministically derived from (seed, domain, index)."""
    return int(keyed_rng(seed, domain, index).integers(0, 1 << 63))
