"""Closeness testing for sequential data.

Quantize proportion series into discrete states, compare the per-state
transition behavior of two trajectories with a Poissonized chi-squared-type
closeness test, build pairwise evolution matrices over calendar segments,
cluster them by severity, and contrast with classical order-blind tests.
"""

from .baselines import TestReport, ks_two_sample, wilcoxon_rank_sum
from .clustering import ClusterAssignment, SeverityKMeans, impute_sentinels, kmeans_rows
from .divergences import chi2_divergence, hellinger, total_variation
from .evolution import (
    EvolutionMatrices,
    calendar_groups,
    pairwise_closeness,
    segment_by_calendar,
    segment_by_count,
)
from .ingest import (
    CountPanel,
    PopulationTable,
    ProportionSeries,
    export_response_table,
    load_counts,
    load_populations,
    proportions,
)
from .markov import TransitionCounts, count_transitions_from, full_transition_counts, sample_counts
from .quantize import (
    QuantizationSpec,
    StateSequence,
    UniformBinQuantizer,
    build_uniform_spec,
    infer_p_max,
    quantize_sequence,
    quantize_value,
)
from .simdata import fixtures, generate_trajectory, perturb_tail
from .tester import (
    ClosenessParams,
    ClosenessResult,
    ClosenessSummary,
    StateTestResult,
    UndeterminedError,
    accept_threshold,
    aggregate,
    chi2_statistic,
    closeness_analysis,
    required_sample_size,
    test_state,
    tv_distance,
)

__version__ = "0.1.0"

__all__ = [
    "ClosenessParams",
    "ClosenessResult",
    "ClosenessSummary",
    "ClusterAssignment",
    "CountPanel",
    "EvolutionMatrices",
    "PopulationTable",
    "ProportionSeries",
    "QuantizationSpec",
    "SeverityKMeans",
    "StateSequence",
    "StateTestResult",
    "TestReport",
    "TransitionCounts",
    "UndeterminedError",
    "UniformBinQuantizer",
    "accept_threshold",
    "aggregate",
    "build_uniform_spec",
    "calendar_groups",
    "chi2_divergence",
    "chi2_statistic",
    "closeness_analysis",
    "count_transitions_from",
    "export_response_table",
    "fixtures",
    "full_transition_counts",
    "generate_trajectory",
    "hellinger",
    "impute_sentinels",
    "infer_p_max",
    "kmeans_rows",
    "ks_two_sample",
    "load_counts",
    "load_populations",
    "pairwise_closeness",
    "perturb_tail",
    "proportions",
    "quantize_sequence",
    "quantize_value",
    "required_sample_size",
    "sample_counts",
    "segment_by_calendar",
    "segment_by_count",
    "test_state",
    "total_variation",
    "tv_distance",
    "wilcoxon_rank_sum",
]
