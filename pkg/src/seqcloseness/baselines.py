"""Classical order-blind two-sample tests for comparison.

Both tests treat the sequences as unordered samples of state values, which is
exactly why they have little power against differences in sequential
structure. The rank-sum test uses mid-ranks for ties; with up to
``EXACT_LIMIT`` pooled observations the two-sided p-value is computed by
exact enumeration of all label assignments (valid under ties), otherwise by
the tie-corrected normal approximation with continuity correction. The
Kolmogorov-Smirnov p-value comes from the asymptotic Kolmogorov distribution
at effective sample size ``n_x * n_y / (n_x + n_y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.special import kolmogorov

EXACT_LIMIT = 20  # pooled size at or below which the rank-sum test enumerates


@dataclass(frozen=True)
class TestReport:
    statistic: float
    p_value: float
    method: str

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p-value {self.p_value} outside [0, 1]")


def _as_samples(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError(f"sample {name} is empty")
    return arr


def _midranks(pooled: np.ndarray) -> np.ndarray:
    order = np.argsort(pooled, kind="stable")
    ranks = np.empty(len(pooled))
    sorted_v = pooled[order]
    i = 0
    while i < len(pooled):
        j = i
        while j + 1 < len(pooled) and sorted_v[j + 1] == sorted_v[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def wilcoxon_rank_sum(x, y) -> TestReport:
    """Two-sided rank-sum test of whether x and y come from one distribution."""
    x = _as_samples(x, "x")
    y = _as_samples(y, "y")
    n1, n2 = len(x), len(y)
    n = n1 + n2
    pooled = np.concatenate([x, y])
    ranks = _midranks(pooled)
    w = float(ranks[:n1].sum())
    mu = n1 * (n + 1) / 2.0

    _, tie_sizes = np.unique(pooled, return_counts=True)
    tie_term = float((tie_sizes.astype(float) ** 3 - tie_sizes).sum())
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term / (n * (n - 1))) if n > 1 else 0.0
    z = 0.0 if var == 0 else (w - mu) / math.sqrt(var)

    if n <= EXACT_LIMIT:
        observed = abs(w - mu)
        hits = total = 0
        for picks in combinations(range(n), n1):
            total += 1
            if abs(ranks[list(picks)].sum() - mu) >= observed - 1e-12:
                hits += 1
        p = hits / total
    else:
        if var == 0:
            p = 1.0
        else:
            shifted = abs(w - mu) - 0.5  # continuity correction
            p = math.erfc(max(shifted, 0.0) / math.sqrt(var) / math.sqrt(2.0))
    return TestReport(statistic=z, p_value=min(1.0, p), method="wilcoxon_rank_sum")


def ks_two_sample(x, y) -> TestReport:
    """Two-sided Kolmogorov-Smirnov test with asymptotic p-value."""
    x = np.sort(_as_samples(x, "x"))
    y = np.sort(_as_samples(y, "y"))
    pooled = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, pooled, side="right") / len(x)
    cdf_y = np.searchsorted(y, pooled, side="right") / len(y)
    d = float(np.abs(cdf_x - cdf_y).max())
    n_eff = len(x) * len(y) / (len(x) + len(y))
    p = float(kolmogorov(math.sqrt(n_eff) * d))
    return TestReport(statistic=d, p_value=min(1.0, max(0.0, p)), method="ks_two_sample")
