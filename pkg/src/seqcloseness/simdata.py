"""Simulated 5-state trajectories and their generator.

The module embeds three reference trajectories of length 100 over states 1..5
and the 5x5 transition probability matrix behind the first one:

* ``qx`` -- drawn from the transition matrix below;
* ``qy`` -- ``qx`` sorted ascending, so it holds exactly the same multiset of
  states but no sequential structure;
* ``qz`` -- ``qx`` with the final 5% of entries overwritten by state 2.

They are frozen constants; a checksum test guards against transcription
drift. The printed matrix rows sum to 1 only within their print precision
(about 1e-7), so ``fixtures()`` renormalizes each row; the verbatim values
remain available as ``TRANSITION_MATRIX_PRINTED``.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .quantize import StateSequence

QX_STATES = (
    1, 4, 1, 2, 2, 5, 1, 2, 2, 5,
    5, 5, 1, 2, 5, 5, 3, 3, 4, 5,
    4, 2, 4, 4, 5, 3, 4, 4, 5, 5,
    5, 5, 4, 3, 2, 2, 5, 1, 4, 3,
    2, 4, 5, 3, 5, 5, 1, 5, 2, 3,
    5, 3, 2, 4, 1, 2, 4, 4, 5, 5,
    1, 2, 2, 1, 2, 2, 1, 5, 5, 3,
    5, 3, 5, 1, 2, 4, 5, 3, 4, 4,
    4, 5, 4, 3, 1, 4, 5, 4, 5, 4,
    3, 2, 1, 3, 2, 3, 5, 1, 3, 4,
)

QY_STATES = (
    1, 1, 1, 1, 1, 1, 1, 1, 1, 1,
    1, 1, 1, 1, 2, 2, 2, 2, 2, 2,
    2, 2, 2, 2, 2, 2, 2, 2, 2, 2,
    2, 2, 2, 3, 3, 3, 3, 3, 3, 3,
    3, 3, 3, 3, 3, 3, 3, 3, 3, 4,
    4, 4, 4, 4, 4, 4, 4, 4, 4, 4,
    4, 4, 4, 4, 4, 4, 4, 4, 4, 4,
    4, 5, 5, 5, 5, 5, 5, 5, 5, 5,
    5, 5, 5, 5, 5, 5, 5, 5, 5, 5,
    5, 5, 5, 5, 5, 5, 5, 5, 5, 5,
)

QZ_STATES = QX_STATES[:95] + (2, 2, 2, 2, 2)

TRANSITION_MATRIX_PRINTED = (
    (0.02126912, 0.40209113, 0.3423650, 0.1571781, 0.07709659),
    (0.19377434, 0.19871080, 0.1079850, 0.1904423, 0.30908763),
    (0.16414480, 0.33028736, 0.0176185, 0.3189076, 0.16904172),
    (0.04017933, 0.03392901, 0.2268634, 0.2755908, 0.42343754),
    (0.24338862, 0.09483701, 0.2326078, 0.1308475, 0.29831911),
)

N_FIXTURE_STATES = 5


class SimulatedData(NamedTuple):
    qx: StateSequence
    qy: StateSequence
    qz: StateSequence
    matrix: np.ndarray


def validate_transition_matrix(matrix, tol: float = 1e-9) -> np.ndarray:
    """Check that ``matrix`` is square and row-stochastic within ``tol``."""
    p = np.asarray(matrix, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError(f"transition matrix must be square, got shape {p.shape}")
    if p.min() < 0 or p.max() > 1:
        raise ValueError("transition probabilities must lie in [0, 1]")
    row_sums = p.sum(axis=1)
    bad = np.abs(row_sums - 1.0) > tol
    if bad.any():
        rows = ", ".join(f"{i + 1} (sum {row_sums[i]!r})" for i in np.nonzero(bad)[0])
        raise ValueError(f"rows are not stochastic within {tol}: {rows}")
    return p


def renormalize_rows(matrix) -> np.ndarray:
    """Divide each row by its sum; rows must already be close to stochastic."""
    p = validate_transition_matrix(matrix, tol=1e-6)
    return p / p.sum(axis=1, keepdims=True)


def fixtures() -> SimulatedData:
    """The three embedded trajectories and the (row-renormalized) matrix."""
    return SimulatedData(
        qx=StateSequence(np.array(QX_STATES), N_FIXTURE_STATES),
        qy=StateSequence(np.array(QY_STATES), N_FIXTURE_STATES),
        qz=StateSequence(np.array(QZ_STATES), N_FIXTURE_STATES),
        matrix=renormalize_rows(TRANSITION_MATRIX_PRINTED),
    )


def generate_trajectory(
    matrix,
    length: int,
    rng: np.random.Generator,
    initial: int | np.ndarray | None = None,
) -> StateSequence:
    """Sample a trajectory of the given length from a transition matrix.

    ``initial`` is a 1-based state, an initial distribution over states, or
    None for the uniform distribution.
    """
    p = validate_transition_matrix(matrix)
    n = p.shape[0]
    if length < 1:
        raise ValueError(f"length must be at least 1, got {length}")
    if initial is None:
        start = np.full(n, 1.0 / n)
    elif np.isscalar(initial) or isinstance(initial, (int, np.integer)):
        state0 = int(initial)
        if not 1 <= state0 <= n:
            raise ValueError(f"initial state must be in [1, {n}], got {state0}")
        start = np.zeros(n)
        start[state0 - 1] = 1.0
    else:
        start = np.asarray(initial, dtype=float)
        if start.shape != (n,) or start.min() < 0 or abs(start.sum() - 1.0) > 1e-9:
            raise ValueError("initial distribution must be a probability vector over states")

    states = np.empty(length, dtype=np.int64)
    # cumulative rows + one uniform per step beats rng.choice in a tight loop
    cum = np.cumsum(p, axis=1)
    cum[:, -1] = 1.0
    u = rng.random(length)
    states[0] = np.searchsorted(np.cumsum(start), u[0], side="right") + 1
    for t in range(1, length):
        states[t] = np.searchsorted(cum[states[t - 1] - 1], u[t], side="right") + 1
    return StateSequence(states, n)


def perturb_tail(seq: StateSequence, alpha: float, replacement: int) -> StateSequence:
    """Overwrite the final ``round(alpha * len / 100)`` entries with one state.

    ``alpha`` is a percentage in [0, 100]; rounding is half away from zero.
    """
    if not 0 <= alpha <= 100:
        raise ValueError(f"alpha must be a percentage in [0, 100], got {alpha}")
    if not 1 <= replacement <= seq.n_states:
        raise ValueError(
            f"replacement state must be in [1, {seq.n_states}], got {replacement}"
        )
    k = int(alpha * len(seq) / 100 + 0.5)
    states = seq.states.copy()
    if k > 0:
        states[len(states) - k :] = replacement
    return StateSequence(states, seq.n_states, seq.spec)
