"""Candidate construction, error estimation and threshold selection."""

from __future__ import annotations

import bisect
import dataclasses
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bounds import (
    ROLE_LABEL0,
    ROLE_LABEL1,
    ROLE_POOLED,
    BoundEvaluator,
    check_ea_budget,
    min_sample_size,
)
from .core import (
    CandidateEntry,
    DomainError,
    FairnessSpec,
    FittedClassifier,
    GroupedScores,
    NoAdmissibleCandidateError,
    Notion,
    PrevalenceEstimates,
    UsageError,
)


class FeasibilityWarning(UserWarning):
    """An error-estimate term was dropped because its cell is empty."""


def rank_below(sorted_scores: Sequence[float], x: float) -> int:
    """Number of entries ``<= x`` in a non-decreasing sequence.

    >>> rank_below([0.1, 0.4, 0.7], 0.7)
    3
    """
    return bisect.bisect_right(sorted_scores, x)


def bayes_paired_threshold(t: float, prevalence: PrevalenceEstimates) -> Optional[float]:
    """Group-1 threshold paired with group-0 threshold ``t``.

    Follows the form of the fair Bayes-optimal rule under equality of
    opportunity: ``p1 pY1 / (2 p1 pY1 - (1/t - 2) p0 pY0)``. Returns
    ``None`` when the denominator is non-positive or the value falls
    outside (0, 1).
    """
    if not 0.0 < t < 1.0:
        raise DomainError(f"paired threshold needs t in (0, 1), got {t}")
    c1 = prevalence.p_a[1] * prevalence.p_Ya[1]
    c0 = prevalence.p_a[0] * prevalence.p_Ya[0]
    denom = 2.0 * c1 - (1.0 / t - 2.0) * c0
    if denom <= 0.0:
        return None
    value = c1 / denom
    if not 0.0 < value < 1.0:
        return None
    return value


def nearest_index(sorted_scores: Sequence[float], target: float) -> int:
    """1-based index of the entry closest to ``target``; ties go to the smaller index."""
    if len(sorted_scores) == 0:
        raise UsageError("cannot search an empty sequence")
    i = bisect.bisect_left(sorted_scores, target)
    if i == len(sorted_scores):
        j = i - 1
    elif i == 0:
        j = 0
    elif target - sorted_scores[i - 1] <= sorted_scores[i] - target:
        j = i - 1
    else:
        j = i
    # first occurrence of a repeated value
    j = bisect.bisect_left(sorted_scores, sorted_scores[j])
    return j + 1


def _estimate_error_terms(k10, k11, k00, k01, sizes):
    n00, n01, n10, n11 = sizes
    n = n00 + n01 + n10 + n11
    t10 = (k10 / (n10 + 1)) * (n10 / n) if n10 else 0.0 * k10
    t11 = (k11 / (n11 + 1)) * (n11 / n) if n11 else 0.0 * k11
    t00 = (1 - k00 / n00) * (n00 / n) if n00 else 0.0 * k00
    t01 = (1 - k01 / n01) * (n01 / n) if n01 else 0.0 * k01
    return t10 + t11 + t00 + t01


def estimate_error(candidate: CandidateEntry, scores: GroupedScores) -> float:
    """Order-statistic plug-in estimate of the misclassification rate.

    Each cell contributes its estimated error rate times its share of the
    calibration sample; all four contributions are added. A cell with no
    scores contributes 0 and triggers a :class:`FeasibilityWarning`.
    """
    sizes = scores.sizes
    if sum(sizes) == 0:
        raise DomainError("cannot estimate error from an empty calibration sample")
    if 0 in sizes:
        warnings.warn(
            f"empty calibration cell(s) in sizes {sizes}; their error terms are dropped",
            FeasibilityWarning,
            stacklevel=2,
        )
    return float(
        _estimate_error_terms(candidate.k_10, candidate.k_11, candidate.k_00, candidate.k_01, sizes)
    )


@dataclass
class CandidateSet:
    """Admissible candidates as parallel arrays.

    ``k_p0``/``k_p1`` are filled for demographic parity only.
    ``n_evaluated`` counts index tuples whose bound was computed.
    """

    notion: Notion
    k_10: np.ndarray
    k_11: np.ndarray
    k_00: np.ndarray
    k_01: np.ndarray
    bound: np.ndarray
    n_evaluated: int
    k_p0: Optional[np.ndarray] = None
    k_p1: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return int(self.bound.size)

    def entry(self, i: int, est_error: Optional[float] = None) -> CandidateEntry:
        pool = None
        if self.k_p0 is not None:
            pool = (int(self.k_p0[i]), int(self.k_p1[i]))
        return CandidateEntry(
            int(self.k_10[i]), int(self.k_11[i]), int(self.k_00[i]), int(self.k_01[i]),
            float(self.bound[i]), est_error, pool,
        )

    def entries(self) -> list[CandidateEntry]:
        return [self.entry(i) for i in range(len(self))]

    def est_errors(self, scores: GroupedScores) -> np.ndarray:
        return np.asarray(
            _estimate_error_terms(self.k_10, self.k_11, self.k_00, self.k_01, scores.sizes),
            dtype=np.float64,
        )


def _pair_terms(ev: BoundEvaluator, role: int, tail_idx, beta_idx, fam_a: int) -> np.ndarray:
    """Term values ``g[tail_idx[i], beta_idx[i]]`` for one family."""
    fam_key = (role, fam_a)
    uniq, inv = np.unique(beta_idx, return_inverse=True)
    cols = ev.columns(fam_key, uniq)
    return cols[inv, tail_idx]


def _grid_pairs(n_a: int, n_b: int) -> tuple[np.ndarray, np.ndarray]:
    ka, kb = np.meshgrid(np.arange(1, n_a + 1), np.arange(1, n_b + 1), indexing="ij")
    return ka.ravel(), kb.ravel()


def _shrunk_pairs(scores: GroupedScores, prevalence: PrevalenceEstimates):
    t10 = scores[1, 0]
    t11 = scores[1, 1]
    k10, k11 = [], []
    for k in range(1, t10.size + 1):
        t = float(t10[k - 1])
        if not 0.0 < t < 1.0:
            continue
        paired = bayes_paired_threshold(t, prevalence)
        if paired is None:
            continue
        k10.append(k)
        k11.append(nearest_index(t11, paired))
    return np.asarray(k10, dtype=np.int64), np.asarray(k11, dtype=np.int64)


def candidate_set(
    notion: Notion | str,
    scores: GroupedScores,
    prevalence: Optional[PrevalenceEstimates],
    spec: FairnessSpec,
    workers: int = 1,
) -> CandidateSet:
    """Admissible candidates (bound <= delta) in array form.

    See :func:`build_candidates` for the object-per-candidate form.
    """
    notion = Notion.parse(notion)
    if notion is not spec.notion:
        spec = dataclasses.replace(spec, notion=notion)
    if spec.candidate_mode == "shrunk" and notion not in (Notion.EOO, Notion.EO):
        raise UsageError("shrunk candidate mode is available for eoo and eo only")
    if scores.n == 0:
        min_sample_size(notion, spec.alpha, spec.delta, (0.0, 0.0)).check(scores)
    if prevalence is None:
        prevalence = PrevalenceEstimates.from_scores(scores)
    if notion is Notion.EA:
        check_ea_budget(spec.alpha, prevalence)
    min_sample_size(notion, spec.alpha, spec.delta, prevalence.p_Ya).check(scores)

    ev = BoundEvaluator(scores, spec, prevalence, workers=workers)
    pools = None
    if notion is Notion.DP:
        pools = (scores.pooled(0), scores.pooled(1))
        kp0, kp1 = _grid_pairs(pools[0].size, pools[1].size)
        thr0 = pools[0][kp0 - 1]
        thr1 = pools[1][kp1 - 1]
        k10 = np.searchsorted(scores[1, 0], thr0, side="right")
        k11 = np.searchsorted(scores[1, 1], thr1, side="right")
        k00 = np.searchsorted(scores[0, 0], thr0, side="right")
        k01 = np.searchsorted(scores[0, 1], thr1, side="right")
        bound = _pair_terms(ev, ROLE_POOLED, kp0, kp1, 0)
        bound = bound + _pair_terms(ev, ROLE_POOLED, kp1, kp0, 1)
    elif notion is Notion.PE:
        k00, k01 = _grid_pairs(scores.size(0, 0), scores.size(0, 1))
        k10 = np.searchsorted(scores[1, 0], scores[0, 0][k00 - 1], side="right")
        k11 = np.searchsorted(scores[1, 1], scores[0, 1][k01 - 1], side="right")
        bound = _pair_terms(ev, ROLE_LABEL0, k00, k01, 0)
        bound = bound + _pair_terms(ev, ROLE_LABEL0, k01, k00, 1)
    else:
        if spec.candidate_mode == "shrunk":
            k10, k11 = _shrunk_pairs(scores, prevalence)
        else:
            k10, k11 = _grid_pairs(scores.size(1, 0), scores.size(1, 1))
        k00 = np.searchsorted(scores[0, 0], scores[1, 0][k10 - 1], side="right")
        k01 = np.searchsorted(scores[0, 1], scores[1, 1][k11 - 1], side="right")
        bound = _pair_terms(ev, ROLE_LABEL1, k10, k11, 0)
        bound = bound + _pair_terms(ev, ROLE_LABEL1, k11, k10, 1)
        if notion in (Notion.EO, Notion.EA):
            bound = bound + _pair_terms(ev, ROLE_LABEL0, k00, k01, 0)
            bound = bound + _pair_terms(ev, ROLE_LABEL0, k01, k00, 1)

    n_evaluated = int(bound.size)
    keep = bound <= spec.delta
    cs = CandidateSet(
        notion=notion,
        k_10=np.asarray(k10, dtype=np.int64)[keep],
        k_11=np.asarray(k11, dtype=np.int64)[keep],
        k_00=np.asarray(k00, dtype=np.int64)[keep],
        k_01=np.asarray(k01, dtype=np.int64)[keep],
        bound=np.asarray(bound, dtype=np.float64)[keep],
        n_evaluated=n_evaluated,
    )
    if pools is not None:
        cs.k_p0 = kp0[keep]
        cs.k_p1 = kp1[keep]
    return cs


def build_candidates(
    notion: Notion | str,
    scores: GroupedScores,
    prevalence: Optional[PrevalenceEstimates],
    spec: FairnessSpec,
    workers: int = 1,
) -> list[CandidateEntry]:
    """All threshold tuples whose violation bound is at most delta.

    Raises
    ------
    InfeasibleError
        Calibration counts are below :func:`min_sample_size`.
    NoAdmissibleCandidateError
        Every evaluated tuple has bound above delta.
    """
    cs = candidate_set(notion, scores, prevalence, spec, workers=workers)
    if len(cs) == 0:
        raise _no_candidate(spec, cs.n_evaluated)
    return cs.entries()


def _no_candidate(spec: FairnessSpec, n_evaluated: int) -> NoAdmissibleCandidateError:
    return NoAdmissibleCandidateError(
        f"none of {n_evaluated} candidate thresholds has violation bound <= delta={spec.delta}; "
        "try a larger alpha or delta, or more calibration data"
    )


def _thresholds(notion: Notion, scores: GroupedScores, chosen: CandidateEntry) -> tuple[float, float]:
    if notion is Notion.DP:
        return (
            float(scores.pooled(0)[chosen.k_pool[0] - 1]),
            float(scores.pooled(1)[chosen.k_pool[1] - 1]),
        )
    if notion is Notion.PE:
        return float(scores[0, 0][chosen.k_00 - 1]), float(scores[0, 1][chosen.k_01 - 1])
    return float(scores[1, 0][chosen.k_10 - 1]), float(scores[1, 1][chosen.k_11 - 1])


def select(cs: CandidateSet, scores: GroupedScores) -> CandidateEntry:
    """Smallest estimated error; ties by smaller bound, then smaller indices."""
    if len(cs) == 0:
        raise NoAdmissibleCandidateError("empty candidate set")
    errors = cs.est_errors(scores)
    zeros = np.zeros(len(cs), dtype=np.int64)
    p0 = cs.k_p0 if cs.k_p0 is not None else zeros
    p1 = cs.k_p1 if cs.k_p1 is not None else zeros
    order = np.lexsort((cs.k_01, cs.k_00, cs.k_11, cs.k_10, p1, p0, cs.bound, errors))
    best = int(order[0])
    return cs.entry(best, float(errors[best]))


def fit(
    notion: Notion | str,
    scores: GroupedScores,
    spec: FairnessSpec,
    workers: int = 1,
) -> FittedClassifier:
    """Calibrate per-group thresholds with the requested guarantee.

    Parameters
    ----------
    notion : Notion or str
        Overrides ``spec.notion`` when different.
    scores : GroupedScores
        Calibration scores.
    spec : FairnessSpec
    workers : int
        Threads for bound evaluation; results do not depend on it.
    """
    notion = Notion.parse(notion)
    if notion is not spec.notion:
        spec = dataclasses.replace(spec, notion=notion)
    cs = candidate_set(notion, scores, None, spec, workers=workers)
    if len(cs) == 0:
        raise _no_candidate(spec, cs.n_evaluated)
    if 0 in scores.sizes:
        warnings.warn(
            f"empty calibration cell(s) in sizes {scores.sizes}; their error terms are dropped",
            FeasibilityWarning,
            stacklevel=2,
        )
    chosen = select(cs, scores)
    t0, t1 = _thresholds(notion, scores, chosen)
    return FittedClassifier(
        t0=t0,
        t1=t1,
        spec=spec,
        chosen=chosen,
        calibration_sizes=scores.sizes,
        n_evaluated=cs.n_evaluated,
        n_admissible=len(cs),
    )
