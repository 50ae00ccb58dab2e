"""Reference divergences on explicit finite distributions.

These are the exact population quantities that the Monte Carlo statistics
estimate, kept separate so they can serve as independent oracles. For
distributions p and q they satisfy the chain

    hellinger(p, q)**2 <= total_variation(p, q)
                       <= sqrt(2) * hellinger(p, q)
                       <= sqrt(chi2_divergence(p, q))

with the normalizations used here (disjoint supports give Hellinger and total
variation exactly 1).
"""

from __future__ import annotations

import numpy as np

SUM_TOLERANCE = 1e-12


def _check_pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError(f"distributions differ in shape: {p.shape} vs {q.shape}")
    for name, v in (("p", p), ("q", q)):
        if v.size == 0:
            raise ValueError(f"{name} is empty")
        if v.min() < 0:
            raise ValueError(f"{name} has negative entries")
        if abs(v.sum() - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"{name} sums to {v.sum()!r}, not 1")
    return p, q


def hellinger(p, q) -> float:
    """Hellinger distance ``sqrt(0.5 * sum (sqrt(p_i) - sqrt(q_i))^2)``, in [0, 1]."""
    p, q = _check_pair(p, q)
    return float(np.sqrt(0.5 * ((np.sqrt(p) - np.sqrt(q)) ** 2).sum()))


def total_variation(p, q) -> float:
    """Total variation distance ``0.5 * sum |p_i - q_i|``, in [0, 1]."""
    p, q = _check_pair(p, q)
    return float(0.5 * np.abs(p - q).sum())


def chi2_divergence(p, q) -> float:
    """Chi-squared divergence ``sum (p_i - q_i)^2 / q_i``; +inf when p puts
    mass where q has none. Asymmetric in its arguments.
    """
    p, q = _check_pair(p, q)
    if np.any((p > 0) & (q == 0)):
        return float("inf")
    support = q > 0
    return float(((p[support] - q[support]) ** 2 / q[support]).sum())
