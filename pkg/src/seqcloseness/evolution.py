"""Segmentation of a trajectory and pairwise closeness over the segments.

A sequence is cut into L segments (by equal counts or by calendar period) and
the closeness test runs for every ordered pair of segments, yielding four
L x L matrices: acceptance probability, reject probability, chi-squared-type
statistic, and total variation distance. Both (i, j) and (j, i) are computed;
although the statistic is exchangeable, the randomization makes the two cells
distinct Monte Carlo samples.

The diagonal is skipped by the pairwise loop and filled with the ideal
self-comparison values (accept 1, reject 0, z 0, d 0) so that downstream
consumers such as clustering receive complete matrices; ``diagonal_filled``
flags the convention. Cells whose test is undetermined (every state a
sentinel) hold -1 and are listed in ``warnings``.

Calendar weeks are anchored 7-day blocks counted from the first observation;
a trailing block shorter than 7 days is absorbed into the last one, mirroring
the remainder policy of ``segment_by_count``. Months are calendar months and
partial months stand on their own.
"""

from __future__ import annotations

import datetime as dt
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._rng import derive_seed
from .quantize import StateSequence
from .tester import (
    ClosenessParams,
    UndeterminedError,
    aggregate,
    closeness_analysis,
)

PERIODS = ("week", "month")


@dataclass(frozen=True)
class EvolutionMatrices:
    """The four L x L matrices of pairwise segment closeness."""

    accept: np.ndarray
    reject: np.ndarray
    z: np.ndarray
    d: np.ndarray
    labels: tuple[str, ...]
    warnings: tuple[tuple[int, int, str], ...] = ()
    diagonal_filled: bool = True

    def __post_init__(self):
        n = len(self.labels)
        for name in ("accept", "reject", "z", "d"):
            m = getattr(self, name)
            if m.shape != (n, n):
                raise ValueError(f"{name} matrix must be {n}x{n}, got {m.shape}")

    @property
    def n_segments(self) -> int:
        return len(self.labels)

    def symmetrized(self) -> "EvolutionMatrices":
        """Average each matrix with its transpose (sentinel cells stay -1)."""

        def sym(m: np.ndarray) -> np.ndarray:
            out = (m + m.T) / 2.0
            bad = (m == -1.0) | (m.T == -1.0)
            out[bad] = -1.0
            return out

        return EvolutionMatrices(
            accept=sym(self.accept),
            reject=sym(self.reject),
            z=sym(self.z),
            d=sym(self.d),
            labels=self.labels,
            warnings=self.warnings,
            diagonal_filled=self.diagonal_filled,
        )


def segment_by_count(seq: StateSequence, n_segments: int) -> list[StateSequence]:
    """Cut into ``n_segments`` contiguous pieces; the first L - 1 have length
    ``len // L`` and the last absorbs the remainder.
    """
    if n_segments < 1:
        raise ValueError(f"n_segments must be positive, got {n_segments}")
    if n_segments > len(seq):
        raise ValueError(
            f"cannot cut a length-{len(seq)} sequence into {n_segments} segments"
        )
    base = len(seq) // n_segments
    out = []
    for i in range(n_segments):
        lo = i * base
        hi = lo + base if i < n_segments - 1 else len(seq)
        out.append(StateSequence(seq.states[lo:hi], seq.n_states, seq.spec))
    return out


def calendar_groups(
    dates: list[dt.date], period: str
) -> list[tuple[str, np.ndarray]]:
    """Group ordered observation dates into labeled calendar periods.

    Returns ``(label, indices)`` pairs in chronological order. ``month``
    labels are ``YYYY-MM``; ``week`` blocks are labeled by their first date.
    """
    if period not in PERIODS:
        raise ValueError(f"period must be one of {PERIODS}, got {period!r}")
    if len(dates) == 0:
        raise ValueError("cannot segment an empty series")
    order = np.argsort([d.toordinal() for d in dates], kind="stable")
    if period == "month":
        keys = [(dates[i].year, dates[i].month) for i in order]
        labels = {k: f"{k[0]:04d}-{k[1]:02d}" for k in keys}
    else:
        first = dates[order[0]]
        n_days = (dates[order[-1]] - first).days + 1
        n_blocks = max(1, n_days // 7)  # trailing partial block joins the last
        keys = []
        for i in order:
            block = min((dates[i] - first).days // 7, n_blocks - 1)
            keys.append(block)
        labels = {
            b: (first + dt.timedelta(days=7 * b)).isoformat()
            for b in sorted(set(keys))
        }
    groups: dict = {}
    for pos, key in zip(order, keys):
        groups.setdefault(key, []).append(int(pos))
    return [(labels[k], np.array(groups[k])) for k in sorted(groups)]


def segment_by_calendar(
    dates: list[dt.date], seq: StateSequence, period: str
) -> tuple[list[str], list[StateSequence]]:
    """Split a dated trajectory into labeled calendar segments."""
    if len(dates) != len(seq):
        raise ValueError("dates and sequence must have the same length")
    labels, segments = [], []
    for label, idx in calendar_groups(dates, period):
        labels.append(label)
        segments.append(StateSequence(seq.states[idx], seq.n_states, seq.spec))
    return labels, segments


def pairwise_closeness(
    segments: list[StateSequence],
    params: ClosenessParams,
    aggregation: str = "mean",
    labels: list[str] | None = None,
    max_workers: int | None = None,
) -> EvolutionMatrices:
    """Run the closeness test for every ordered pair of segments.

    Cell (i, j) uses the random stream derived from ``(params.seed, i, j)``,
    so results do not depend on the execution order or the worker count.
    """
    n = len(segments)
    if n < 2:
        raise ValueError(f"need at least 2 segments, got {n}")
    if labels is None:
        labels = [f"segment_{i + 1}" for i in range(n)]
    if len(labels) != n:
        raise ValueError("labels must match the number of segments")

    accept = np.eye(n)
    reject = np.zeros((n, n))
    z = np.zeros((n, n))
    d = np.zeros((n, n))
    warnings: list[tuple[int, int, str]] = []

    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]

    def run(pair: tuple[int, int]):
        i, j = pair
        cell_params = replace(params, seed=derive_seed(params.seed, i, j))
        try:
            result = closeness_analysis(segments[i], segments[j], cell_params)
            return i, j, aggregate(result, aggregation), None
        except UndeterminedError as exc:
            return i, j, None, str(exc)

    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            outcomes = list(pool.map(run, pairs))
    else:
        outcomes = [run(p) for p in pairs]

    for i, j, summary, problem in outcomes:
        if summary is None:
            accept[i, j] = reject[i, j] = z[i, j] = d[i, j] = -1.0
            warnings.append((i, j, problem))
        else:
            accept[i, j] = summary.accept_prob
            reject[i, j] = summary.reject_prob
            z[i, j] = summary.z
            d[i, j] = summary.d

    warnings.sort()
    return EvolutionMatrices(
        accept=accept,
        reject=reject,
        z=z,
        d=d,
        labels=tuple(labels),
        warnings=tuple(warnings),
    )
