"""Empirical transition counts and categorical resampling.

The per-state closeness test compares, for a fixed origin state ``b``, the
empirical conditional next-state distributions of two trajectories. The
sufficient statistic is the vector of observed transition counts out of ``b``.
Resampling draws i.i.d. categorical samples from the normalized count vector;
a single multinomial draw is distributionally identical to drawing the samples
one by one and counting, and numpy's generator realizes the multinomial by
conditional binomial decomposition, which keeps results reproducible across
platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quantize import StateSequence


@dataclass(frozen=True)
class TransitionCounts:
    """Observed transition counts out of one origin state."""

    from_state: int
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        if counts.ndim != 1:
            raise ValueError("counts must be one-dimensional")
        if counts.size and counts.min() < 0:
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def count_transitions_from(seq: StateSequence, from_state: int) -> TransitionCounts:
    """Count the transitions ``from_state -> k`` observed in the trajectory.

    Sequences of length 0 or 1 contain no transitions and yield a zero vector.
    """
    if not 1 <= from_state <= seq.n_states:
        raise ValueError(f"from_state must be in [1, {seq.n_states}], got {from_state}")
    counts = np.zeros(seq.n_states, dtype=np.int64)
    s = seq.states
    if len(s) >= 2:
        successors = s[1:][s[:-1] == from_state]
        np.add.at(counts, successors - 1, 1)
    return TransitionCounts(from_state, counts)


def full_transition_counts(seq: StateSequence) -> np.ndarray:
    """The full ``n_states x n_states`` transition count matrix.

    Row ``b`` equals ``count_transitions_from(seq, b + 1).counts`` and the
    entries sum to ``len(seq) - 1`` for non-empty sequences.
    """
    matrix = np.zeros((seq.n_states, seq.n_states), dtype=np.int64)
    s = seq.states
    if len(s) >= 2:
        np.add.at(matrix, (s[:-1] - 1, s[1:] - 1), 1)
    return matrix


def sample_counts(weights, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Counts of ``n_samples`` i.i.d. categorical draws from ``weights``.

    ``weights`` is any non-negative vector with at least one positive entry;
    it is normalized internally. The returned vector sums to ``n_samples``.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1:
        raise ValueError("weights must be one-dimensional")
    if w.size and w.min() < 0:
        raise ValueError("weights must be non-negative")
    total = w.sum()
    if total <= 0:
        raise ValueError("weights must have at least one positive entry")
    if n_samples < 0:
        raise ValueError("n_samples must be non-negative")
    if n_samples == 0:
        return np.zeros(w.size, dtype=np.int64)
    return rng.multinomial(int(n_samples), w / total).astype(np.int64)
