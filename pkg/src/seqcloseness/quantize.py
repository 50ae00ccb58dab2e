"""Uniform quantization of proportion series into a discrete state space.

Each dimension of ``[0, p_max]`` is cut into ``n_bins`` equal bins with edges
``e_i = (i - 1) * p_max / n_bins`` for ``i = 1..n_bins + 1``. A value ``v``
falls into bin ``i`` when ``e_i < v <= e_{i+1}``; zero is assigned to bin 1
(the first bin is closed below, since an observed proportion of exactly zero
is legitimate and common). Multi-dimensional bins are flattened into a single
state identifier in ``1..n_bins**n_dims`` with dimension 1 varying fastest.

Values outside ``[0, p_max]`` raise rather than clamp: silent clamping hides
data problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted


@dataclass(frozen=True)
class QuantizationSpec:
    """Uniform binning of ``[0, p_max]**n_dims`` into ``n_bins**n_dims`` states."""

    p_max: float
    n_bins: int
    n_dims: int = 1

    def __post_init__(self):
        if not 0.0 < self.p_max <= 1.0:
            raise ValueError(f"p_max must be in (0, 1], got {self.p_max}")
        if self.n_bins < 2:
            raise ValueError(f"n_bins must be at least 2, got {self.n_bins}")
        if self.n_dims < 1:
            raise ValueError(f"n_dims must be at least 1, got {self.n_dims}")

    @property
    def edges(self) -> np.ndarray:
        """The ``n_bins + 1`` strictly increasing bin edges of one dimension."""
        return np.linspace(0.0, self.p_max, self.n_bins + 1)

    @property
    def n_states(self) -> int:
        return self.n_bins**self.n_dims


@dataclass(frozen=True)
class StateSequence:
    """An ordered trajectory over state identifiers ``1..n_states``."""

    states: np.ndarray
    n_states: int
    spec: QuantizationSpec | None = field(default=None, compare=False)

    def __post_init__(self):
        states = np.asarray(self.states, dtype=np.int64)
        object.__setattr__(self, "states", states)
        if states.ndim != 1:
            raise ValueError("states must be one-dimensional")
        if self.n_states < 1:
            raise ValueError("n_states must be positive")
        if states.size and (states.min() < 1 or states.max() > self.n_states):
            raise ValueError(
                f"state identifiers must lie in [1, {self.n_states}], "
                f"got range [{states.min()}, {states.max()}]"
            )

    def __len__(self) -> int:
        return len(self.states)


def build_uniform_spec(p_max: float, n_bins: int, n_dims: int = 1) -> QuantizationSpec:
    """Validate and build a uniform quantization spec."""
    return QuantizationSpec(p_max=float(p_max), n_bins=int(n_bins), n_dims=int(n_dims))


def infer_p_max(values: np.ndarray, n_bins: int) -> float:
    """Default upper bound: the observed maximum rounded up to the next 1/n_bins
    grid multiple, capped at 1.0.

    An all-zero input yields one bin width so that zero still quantizes.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 1.0
    vmax = float(values.max())
    if vmax < 0:
        raise ValueError("proportions must be non-negative")
    if vmax > 1.0:
        raise ValueError(f"proportions must not exceed 1, got {vmax}")
    k = max(1, math.ceil(vmax * n_bins - 1e-12))
    return min(1.0, k / n_bins)


def _bin_index(spec: QuantizationSpec, component: float, dim: int, where: str) -> int:
    if component < 0.0:
        raise ValueError(f"negative proportion {component} at {where} (dimension {dim})")
    if component > spec.p_max:
        raise ValueError(
            f"proportion {component} exceeds p_max={spec.p_max} at {where} (dimension {dim})"
        )
    # number of edges strictly below the value; zero lands in bin 1
    i = int(np.searchsorted(spec.edges, component, side="left"))
    return max(1, i)


def quantize_value(spec: QuantizationSpec, value) -> int:
    """Map one observation (scalar or length-``n_dims`` vector) to its state id."""
    v = np.atleast_1d(np.asarray(value, dtype=float))
    if v.shape != (spec.n_dims,):
        raise ValueError(f"expected {spec.n_dims} component(s), got shape {v.shape}")
    state = 0
    for dim in range(spec.n_dims):
        b = _bin_index(spec, float(v[dim]), dim + 1, "input value")
        state += (b - 1) * spec.n_bins**dim
    return state + 1


def quantize_sequence(spec: QuantizationSpec, series) -> StateSequence:
    """Quantize an ordered series of observations element-wise."""
    arr = np.asarray(series, dtype=float)
    if arr.size == 0:
        return StateSequence(np.empty(0, dtype=np.int64), spec.n_states, spec)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] != spec.n_dims:
        raise ValueError(f"expected shape (n, {spec.n_dims}), got {arr.shape}")
    states = np.empty(arr.shape[0], dtype=np.int64)
    for idx in range(arr.shape[0]):
        state = 0
        for dim in range(spec.n_dims):
            b = _bin_index(spec, float(arr[idx, dim]), dim + 1, f"index {idx}")
            state += (b - 1) * spec.n_bins**dim
        states[idx] = state + 1
    return StateSequence(states, spec.n_states, spec)


class UniformBinQuantizer(TransformerMixin, BaseEstimator):
    """Scikit-learn style transformer wrapping the uniform quantizer.

    ``fit`` learns ``p_max_`` from the data when ``p_max`` is None (observed
    maximum rounded up to the bin grid) and freezes the quantization spec;
    ``transform`` maps rows of proportions to 1-based state identifiers.

    :param n_bins: bins per dimension.
    :param p_max: per-dimension upper bound; inferred from the data if None.
    """

    def __init__(self, n_bins: int = 20, p_max: float | None = None):
        self.n_bins = n_bins
        self.p_max = p_max

    def fit(self, X, y=None):
        X = check_array(X, ensure_2d=True, dtype=float, estimator=self)
        if self.p_max is None:
            self.p_max_ = infer_p_max(X, self.n_bins)
        else:
            self.p_max_ = float(self.p_max)
        self.n_dims_ = X.shape[1]
        self.spec_ = build_uniform_spec(self.p_max_, self.n_bins, self.n_dims_)
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, ["spec_"])
        X = check_array(X, ensure_2d=True, dtype=float, estimator=self)
        if X.shape[1] != self.n_dims_:
            raise ValueError(
                f"number of columns {X.shape[1]} does not match fit size {self.n_dims_}"
            )
        return quantize_sequence(self.spec_, X).states
