"""Deterministic random-stream derivation.

Every stochastic routine in this package draws from a ``numpy.random.Generator``
whose state is derived from a master integer seed plus an integer key path,
e.g. ``(seed, state_index)`` for per-state testing or ``(seed, i, j)`` for a
matrix cell. Streams derived from distinct key paths are statistically
independent, and the derivation is stable across platforms and thread
schedules, so concurrent execution cannot change any result.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return the generator for key path ``(seed, *path)``.

    Negative components are mapped to their unsigned 64-bit representation so
    that any Python integer is accepted.
    """
    entropy = [int(seed) & _MASK64] + [int(p) & _MASK64 for p in path]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(seed: int, *path: int) -> int:
    """Collapse ``(seed, *path)`` into a single 64-bit integer seed.

    Used where an API expects a plain integer seed (for example the per-cell
    seeds of the pairwise evolution matrices).
    """
    entropy = [int(seed) & _MASK64] + [int(p) & _MASK64 for p in path]
    words = np.random.SeedSequence(entropy).generate_state(2, np.uint32)
    return (int(words[0]) << 32) | int(words[1])
