"""Post-processing thresholds with finite-sample group-fairness guarantees.

Given scores from any pre-trained classifier on a labeled calibration
sample, pick one threshold per protected group so that a chosen fairness
gap stays within ``alpha`` with probability at least ``1 - delta``, then
among those pick the one with the smallest estimated error.
"""

from .bounds import (
    BoundEvaluator,
    BoundTermParams,
    SampleRequirement,
    binom_tail,
    boundary_bound,
    g_term,
    min_sample_size,
    violation_bound,
)
from .calibrate import (
    FeasibilityWarning,
    bayes_paired_threshold,
    build_candidates,
    estimate_error,
    fit,
    rank_below,
)
from .classify import fairness_metrics, predict, predict_array, quantile_summary
from .core import (
    CandidateEntry,
    DomainError,
    FairnessReport,
    FairnessSpec,
    FairThreshError,
    FittedClassifier,
    GroupedScores,
    InfeasibleError,
    NoAdmissibleCandidateError,
    Notion,
    PrevalenceEstimates,
    UsageError,
    validate_grouped_scores,
)
from .synth import MODELS, SyntheticModelSpec, run_benchmark, synth_generate, train_base_scorer

__version__ = "0.1.0"
