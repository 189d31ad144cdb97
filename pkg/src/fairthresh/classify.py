"""Applying fitted thresholds and measuring group-fairness gaps."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .core import DomainError, FairnessReport, FittedClassifier, UsageError


def predict(model: FittedClassifier, score: float, group: int) -> int:
    """Label for one score: 1 iff ``score > t_group``."""
    if not (0.0 <= score <= 1.0):
        raise DomainError(f"score must lie in [0, 1], got {score}")
    if group not in (0, 1):
        raise DomainError(f"group must be 0 or 1, got {group}")
    return int(score > model.threshold(group))


def predict_array(model: FittedClassifier, scores, groups) -> np.ndarray:
    """Vectorized :func:`predict`; returns an int8 array."""
    scores = np.asarray(scores, dtype=np.float64)
    groups = np.asarray(groups)
    if scores.shape != groups.shape:
        raise UsageError("scores and groups must have the same shape")
    if scores.size:
        if not np.all(np.isfinite(scores)) or scores.min() < 0.0 or scores.max() > 1.0:
            raise DomainError("scores must lie in [0, 1]")
        if not np.all(np.isin(groups, (0, 1))):
            raise DomainError("group values must be 0 or 1")
    thr = np.where(groups == 1, model.t1, model.t0)
    return (scores > thr).astype(np.int8)


def _rate(num: int, den: int) -> Optional[float]:
    return num / den if den else None


def _gap(r1: Optional[float], r0: Optional[float]) -> Optional[float]:
    if r1 is None or r0 is None:
        return None
    return r1 - r0


def fairness_metrics(predictions, labels, groups) -> FairnessReport:
    """Empirical fairness gaps (group 1 minus group 0) and accuracy.

    Parameters
    ----------
    predictions, labels, groups : array_like of {0, 1}
        Equal-length sequences.

    Returns
    -------
    FairnessReport
        ``deoo`` (TPR gap), ``dpe`` (FPR gap), ``ddp`` (positive-rate gap),
        ``dea`` (misclassification-rate gap) and overall accuracy. Gaps
        whose conditioning cell is empty are ``None``.
    """
    pred = np.asarray(predictions)
    y = np.asarray(labels)
    a = np.asarray(groups)
    if not (pred.shape == y.shape == a.shape) or pred.ndim != 1:
        raise UsageError("predictions, labels and groups must be 1-D and of equal length")
    for name, arr in (("prediction", pred), ("label", y), ("group", a)):
        if arr.size and not np.all(np.isin(arr, (0, 1))):
            raise DomainError(f"{name} values must be 0 or 1")

    counts = {}
    for yy in (0, 1):
        for aa in (0, 1):
            mask = (y == yy) & (a == aa)
            counts[(yy, aa)] = (int(mask.sum()), int(pred[mask].sum()))

    def cond_rate(yy, aa):
        members, pos = counts[(yy, aa)]
        return _rate(pos, members)

    def group_rate(aa, wrong=False):
        members = counts[(0, aa)][0] + counts[(1, aa)][0]
        if wrong:
            # false positives plus false negatives
            num = counts[(0, aa)][1] + (counts[(1, aa)][0] - counts[(1, aa)][1])
        else:
            num = counts[(0, aa)][1] + counts[(1, aa)][1]
        return _rate(num, members)

    accuracy = _rate(int((pred == y).sum()), int(pred.size))
    return FairnessReport(
        deoo=_gap(cond_rate(1, 1), cond_rate(1, 0)),
        dpe=_gap(cond_rate(0, 1), cond_rate(0, 0)),
        ddp=_gap(group_rate(1), group_rate(0)),
        dea=_gap(group_rate(1, wrong=True), group_rate(0, wrong=True)),
        accuracy=accuracy,
        counts=counts,
    )


def quantile_summary(values: Sequence[float], q: float) -> float:
    """Upper order-statistic quantile: the ``ceil(q * m)``-th smallest value.

    ``q = 0`` returns the minimum.
    """
    vals = np.sort(np.asarray(values, dtype=np.float64))
    if vals.size == 0:
        raise UsageError("quantile of an empty sequence")
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q must lie in [0, 1], got {q}")
    m = vals.size
    # guard against q*m landing a hair above an integer
    pos = q * m
    k = round(pos) if abs(pos - round(pos)) < 1e-9 else math.ceil(pos)
    return float(vals[max(int(k), 1) - 1])
