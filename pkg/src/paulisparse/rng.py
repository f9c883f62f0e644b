"""Named, counter-based random streams.

Every subsystem draws from its own Philox stream keyed by ``(seed, name)``, so
adding draws in one subsystem never shifts another one.
"""
from __future__ import annotations

import hashlib

import numpy as np


def _name_key(name: str) -> int:
    return int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "little")


def stream(seed: int, name: str, *extra: int) -> np.random.Generator:
    """Independent generator for ``(seed, name, *extra)``.

    ``extra`` is typically a trial or block index.
    """
    if seed is None:
        raise ValueError("a seed is required")
    ss = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(_name_key(name), *map(int, extra)))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(int(rng), "default")


def child(rng: np.random.Generator, name: str) -> np.random.Generator:
    """Derive a named sub-stream from an existing generator."""
    seed = int(rng.integers(0, 2**63))
    return stream(seed, name)
