"""Per-state Poissonized closeness testing of two state trajectories.

For every origin state the empirical conditional next-state distributions of
the two trajectories are compared by Monte Carlo: each trial draws a Poisson
sample size per side (canonical Poissonization, which makes per-bin counts
independent and the chi-squared-type statistic exactly mean-zero when the two
conditionals are equal), resamples both conditionals, and evaluates

* ``z``, the unbiased chi-squared-type statistic
  ``sum_b ((cx_b - cy_b)^2 - (cx_b + cy_b)) / (cx_b + cy_b)``, accepted when
  it stays below ``m^2 eps^2 / (8 (m + n_states))``, and
* ``d``, the total variation distance between the two resampled empirical
  distributions, rejected when it exceeds ``eps``.

States with at most ``min_transitions`` observed outgoing transitions on
either side are not testable and carry the sentinel value -1 in all fields.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import median

import numpy as np

from ._rng import substream
from .markov import TransitionCounts, full_transition_counts, sample_counts
from .quantize import StateSequence

SENTINEL = -1.0

AGGREGATION_METHODS = ("mean", "median", "min")


class UndeterminedError(RuntimeError):
    """Raised when every state is a sentinel and no aggregate exists."""


@dataclass(frozen=True)
class ClosenessParams:
    """Knobs of the per-state closeness test.

    :param epsilon: distinguishing distance, in (0, 1).
    :param sample_scale: multiplier of the sample-complexity bound (C).
    :param n_trials: Monte Carlo test repetitions per state (N).
    :param min_transitions: states with at most this many outgoing transitions
        on either side are sentinels (mu).
    :param n_states: total state count of the quantized space.
    :param seed: master seed; per-state streams are derived from (seed, state).
    """

    epsilon: float
    sample_scale: float = 100.0
    n_trials: int = 5
    min_transitions: int = 1
    n_states: int = 20
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.sample_scale <= 0:
            raise ValueError(f"sample_scale must be positive, got {self.sample_scale}")
        if self.n_trials < 1:
            raise ValueError(f"n_trials must be at least 1, got {self.n_trials}")
        if self.min_transitions < 0:
            raise ValueError("min_transitions must be non-negative")
        if self.n_states < 1:
            raise ValueError("n_states must be positive")


@dataclass(frozen=True)
class StateTestResult:
    """Outcome of the closeness test at one origin state.

    Sentinel results carry -1 in all four summary fields and empty sample
    arrays. ``z_samples``/``d_samples`` hold the per-trial statistics so that
    the accept/reject counts can be audited after the fact.
    """

    from_state: int
    accept_prob: float
    reject_prob: float
    z_mean: float
    d_mean: float
    sentinel: bool
    z_samples: np.ndarray = field(default_factory=lambda: np.empty(0), compare=False)
    d_samples: np.ndarray = field(default_factory=lambda: np.empty(0), compare=False)


@dataclass(frozen=True)
class ClosenessResult:
    """Per-state results for all states of the quantized space."""

    per_state: tuple[StateTestResult, ...]
    params: ClosenessParams

    def __post_init__(self):
        if len(self.per_state) != self.params.n_states:
            raise ValueError("per_state length must equal params.n_states")

    def testable(self) -> list[StateTestResult]:
        return [r for r in self.per_state if not r.sentinel]


@dataclass(frozen=True)
class ClosenessSummary:
    """Aggregate of the non-sentinel per-state results."""

    accept_prob: float
    reject_prob: float
    z: float
    d: float
    method: str
    states_used: int


def required_sample_size(epsilon: float, sample_scale: float, n_states: int) -> float:
    """Per-trial expected sample size
    ``sample_scale * max(n_states^(2/3) / epsilon^(4/3), n_states^(1/2) / epsilon^2)``.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    if sample_scale <= 0:
        raise ValueError(f"sample_scale must be positive, got {sample_scale}")
    if n_states < 1:
        raise ValueError(f"n_states must be positive, got {n_states}")
    return sample_scale * max(
        n_states ** (2.0 / 3.0) / epsilon ** (4.0 / 3.0),
        n_states**0.5 / epsilon**2,
    )


def accept_threshold(sample_size: float, epsilon: float, n_states: int) -> float:
    """Acceptance cutoff ``m^2 eps^2 / (8 (m + n_states))`` for the statistic."""
    if sample_size <= 0:
        raise ValueError(f"sample_size must be positive, got {sample_size}")
    return sample_size**2 * epsilon**2 / (8.0 * (sample_size + n_states))


def chi2_statistic(cx, cy) -> float:
    """Unbiased chi-squared-type two-sample statistic on count vectors.

    Bins where both counts are zero carry no evidence and contribute 0.
    """
    cx = np.asarray(cx, dtype=np.int64)
    cy = np.asarray(cy, dtype=np.int64)
    if cx.shape != cy.shape:
        raise ValueError(f"count vectors differ in length: {cx.shape} vs {cy.shape}")
    if (cx.size and cx.min() < 0) or (cy.size and cy.min() < 0):
        raise ValueError("counts must be non-negative")
    s = cx + cy
    occupied = s > 0
    diff = (cx - cy).astype(float)
    return float(((diff[occupied] ** 2 - s[occupied]) / s[occupied]).sum())


def tv_distance(cx, cy) -> float:
    """Total variation distance between the empirical distributions of two
    count vectors; both must contain at least one sample.
    """
    cx = np.asarray(cx, dtype=float)
    cy = np.asarray(cy, dtype=float)
    if cx.shape != cy.shape:
        raise ValueError(f"count vectors differ in length: {cx.shape} vs {cy.shape}")
    nx, ny = cx.sum(), cy.sum()
    if nx <= 0 or ny <= 0:
        raise ValueError("total variation distance needs at least one sample per side")
    return float(0.5 * np.abs(cx / nx - cy / ny).sum())


def test_state(
    tx: TransitionCounts,
    ty: TransitionCounts,
    params: ClosenessParams,
    rng: np.random.Generator,
) -> StateTestResult:
    """Run the ``n_trials`` Monte Carlo closeness trials for one origin state.

    Each trial draws an independent Poisson(m) sample size per side. A side
    that happens to draw zero samples contributes no evidence: the empty bins
    drop out of the statistic and the trial's distance is taken as 0.
    """
    if tx.from_state != ty.from_state:
        raise ValueError(
            f"transition counts are for different origin states: "
            f"{tx.from_state} vs {ty.from_state}"
        )
    if tx.counts.size != params.n_states or ty.counts.size != params.n_states:
        raise ValueError("transition count vectors must have length n_states")

    if tx.total <= params.min_transitions or ty.total <= params.min_transitions:
        return StateTestResult(
            tx.from_state, SENTINEL, SENTINEL, SENTINEL, SENTINEL, sentinel=True
        )

    m = required_sample_size(params.epsilon, params.sample_scale, params.n_states)
    tau = accept_threshold(m, params.epsilon, params.n_states)
    accepted = rejected = 0
    z_samples = np.empty(params.n_trials)
    d_samples = np.empty(params.n_trials)
    for n in range(params.n_trials):
        m0x = int(rng.poisson(m))
        cx = sample_counts(tx.counts, m0x, rng)
        m0y = int(rng.poisson(m))
        cy = sample_counts(ty.counts, m0y, rng)
        z = chi2_statistic(cx, cy)
        d = tv_distance(cx, cy) if (m0x > 0 and m0y > 0) else 0.0
        z_samples[n] = z
        d_samples[n] = d
        if z <= tau:
            accepted += 1
        if d > params.epsilon:
            rejected += 1
    return StateTestResult(
        tx.from_state,
        accept_prob=accepted / params.n_trials,
        reject_prob=rejected / params.n_trials,
        z_mean=float(z_samples.mean()),
        d_mean=float(d_samples.mean()),
        sentinel=False,
        z_samples=z_samples,
        d_samples=d_samples,
    )


def closeness_analysis(
    x: StateSequence,
    y: StateSequence,
    params: ClosenessParams,
    max_workers: int | None = None,
) -> ClosenessResult:
    """Test closeness of two trajectories state by state.

    The random stream of state ``b`` is derived from ``(params.seed, b)``, so
    the result is identical whether states run sequentially or concurrently.
    """
    if len(x) == 0 or len(y) == 0:
        raise ValueError("input sequences must be non-empty")
    if x.n_states != y.n_states:
        raise ValueError(
            f"sequences are quantized over different state spaces: "
            f"{x.n_states} vs {y.n_states}"
        )
    if x.n_states != params.n_states:
        raise ValueError(
            f"params.n_states={params.n_states} does not match the sequences' "
            f"state space {x.n_states}"
        )

    counts_x = full_transition_counts(x)
    counts_y = full_transition_counts(y)

    def run(b: int) -> StateTestResult:
        tx = TransitionCounts(b, counts_x[b - 1])
        ty = TransitionCounts(b, counts_y[b - 1])
        return test_state(tx, ty, params, substream(params.seed, b))

    states = range(1, params.n_states + 1)
    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            per_state = tuple(pool.map(run, states))
    else:
        per_state = tuple(run(b) for b in states)
    return ClosenessResult(per_state, params)


def aggregate(result: ClosenessResult, method: str = "mean") -> ClosenessSummary:
    """Aggregate the non-sentinel per-state results with mean, median or min."""
    if method not in AGGREGATION_METHODS:
        raise ValueError(f"method must be one of {AGGREGATION_METHODS}, got {method!r}")
    usable = result.testable()
    if not usable:
        raise UndeterminedError(
            "closeness is undetermined: every state has too few transitions"
        )
    reduce = {"mean": np.mean, "median": median, "min": min}[method]

    def agg(values: list[float]) -> float:
        return float(reduce(values))

    return ClosenessSummary(
        accept_prob=agg([r.accept_prob for r in usable]),
        reject_prob=agg([r.reject_prob for r in usable]),
        z=agg([r.z_mean for r in usable]),
        d=agg([r.d_mean for r in usable]),
        method=method,
        states_used=len(usable),
    )
