"""K-means over rows of a pairwise-distance matrix with severity ordering.

Rows of an L x L distance matrix describe how each segment (city, month,
week) relates to all others; Lloyd's algorithm with k-means++ seeding groups
them, and the clusters are then ranked by ascending mean centroid magnitude
into severity levels (for k = 3: low, moderate, high). Sentinel entries (-1,
marking untestable cells) are missing data, not distances, and are imputed
with the column mean of the valid entries before clustering.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._rng import substream

LEVEL_NAMES_K3 = ("low", "moderate", "high")


@dataclass(frozen=True)
class ClusterAssignment:
    """Result of clustering the rows of a distance matrix.

    ``level_order[c]`` is the severity rank (0 = lowest) of cluster ``c``;
    ``inertia_history`` records the within-cluster sum of squares after every
    Lloyd update, which is non-increasing.
    """

    labels: np.ndarray
    level_order: np.ndarray
    centroids: np.ndarray
    inertia: float
    inertia_history: tuple[float, ...]

    @property
    def severity(self) -> np.ndarray:
        """Per-row severity ranks, ``level_order[labels]``."""
        return self.level_order[self.labels]


def impute_sentinels(matrix, sentinel: float = -1.0) -> np.ndarray:
    """Replace sentinel entries with the column mean of the valid entries.

    A column with no valid entry at all falls back to 0.
    """
    x = np.array(matrix, dtype=float, copy=True)
    mask = x == sentinel
    if mask.any():
        for col in np.nonzero(mask.any(axis=0))[0]:
            good = x[~mask[:, col], col]
            x[mask[:, col], col] = good.mean() if good.size else 0.0
    return x


def _kmeans_plusplus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]))
    centroids[0] = x[rng.integers(n)]
    closest = ((x - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = closest.sum()
        if total <= 0:
            centroids[i] = x[rng.integers(n)]
        else:
            centroids[i] = x[rng.choice(n, p=closest / total)]
        closest = np.minimum(closest, ((x - centroids[i]) ** 2).sum(axis=1))
    return centroids


def kmeans_rows(
    matrix,
    k: int,
    seed: int = 0,
    max_iter: int = 300,
    sentinel_imputation: bool = True,
) -> ClusterAssignment:
    """Cluster the rows of a (distance) matrix into ``k`` severity-ordered groups.

    Lloyd's algorithm with k-means++ initialization; iteration stops when the
    assignment is stable or after ``max_iter`` updates. A cluster that loses
    all its rows is re-seeded to the row currently worst represented by its
    centroid, which keeps the objective non-increasing.
    """
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {x.shape}")
    if not 1 <= k <= x.shape[0]:
        raise ValueError(f"k must be in [1, {x.shape[0]}], got {k}")
    if max_iter < 1:
        raise ValueError("max_iter must be positive")
    if sentinel_imputation:
        x = impute_sentinels(x)

    rng = substream(seed)
    centroids = _kmeans_plusplus(x, k, rng)
    labels = np.full(x.shape[0], -1)
    history: list[float] = []
    for _ in range(max_iter):
        dist2 = ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = dist2.argmin(axis=1)
        for c in range(k):
            members = new_labels == c
            if members.any():
                centroids[c] = x[members].mean(axis=0)
            else:
                worst = dist2[np.arange(len(x)), new_labels].argmax()
                centroids[c] = x[worst]
                new_labels[worst] = c
        history.append(
            float(((x - centroids[new_labels]) ** 2).sum())
        )
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels

    level_order = np.empty(k, dtype=np.int64)
    level_order[np.argsort(centroids.mean(axis=1), kind="stable")] = np.arange(k)
    return ClusterAssignment(
        labels=labels,
        level_order=level_order,
        centroids=centroids,
        inertia=history[-1],
        inertia_history=tuple(history),
    )


class SeverityKMeans(ClusterMixin, BaseEstimator):
    """Scikit-learn style wrapper around :func:`kmeans_rows`.

    :param n_clusters: number of severity groups (3 matches low/moderate/high).
    :param max_iter: Lloyd iteration cap.
    :param random_state: integer seed; identical seeds give identical fits.
    :param sentinel_imputation: replace -1 entries by column means before
        clustering.
    """

    def __init__(
        self,
        n_clusters: int = 3,
        max_iter: int = 300,
        random_state: int = 0,
        sentinel_imputation: bool = True,
    ):
        self.n_clusters = n_clusters
        self.max_iter = max_iter
        self.random_state = random_state
        self.sentinel_imputation = sentinel_imputation

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=True, dtype=float, estimator=self)
        assignment = kmeans_rows(
            X,
            k=self.n_clusters,
            seed=self.random_state,
            max_iter=self.max_iter,
            sentinel_imputation=self.sentinel_imputation,
        )
        self.assignment_ = assignment
        self.labels_ = assignment.labels
        self.cluster_centers_ = assignment.centroids
        self.severity_ranks_ = assignment.severity
        self.inertia_ = assignment.inertia
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, ["cluster_centers_"])
        X = check_array(X, ensure_2d=True, dtype=float, estimator=self)
        if self.sentinel_imputation:
            X = impute_sentinels(X)
        dist2 = ((X[:, None, :] - self.cluster_centers_[None, :, :]) ** 2).sum(axis=2)
        return dist2.argmin(axis=1)
