"""Domain types shared across the package.

Scores are split into four cells indexed by ``(y, a)`` (label, protected
group). Each cell is kept sorted non-decreasing, so an index ``k`` into a
cell addresses the ``k``-th order statistic of that cell.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

CELLS: tuple[tuple[int, int], ...] = ((0, 0), (0, 1), (1, 0), (1, 1))


class FairThreshError(Exception):
    """Base class for all package errors."""


class DomainError(FairThreshError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class UsageError(FairThreshError, ValueError):
    """Malformed call: wrong lengths, missing arguments, bad option values."""


class InfeasibleError(FairThreshError):
    """Calibration sample is too small for the requested guarantee.

    Attributes
    ----------
    required : dict
        Minimum counts keyed like :attr:`SampleRequirement.minima`.
    actual : dict
        Observed counts under the same keys.
    """

    def __init__(self, message: str, required: dict | None = None, actual: dict | None = None):
        super().__init__(message)
        self.required = dict(required or {})
        self.actual = dict(actual or {})


class NoAdmissibleCandidateError(FairThreshError):
    """No threshold tuple has a violation bound at or below delta."""


class Notion(str, enum.Enum):
    EOO = "eoo"  # equality of opportunity (TPR gap)
    EO = "eo"  # equalized odds (TPR and FPR gaps)
    DP = "dp"  # demographic parity
    PE = "pe"  # predictive equality (FPR gap)
    EA = "ea"  # equalized accuracy

    @classmethod
    def parse(cls, value: "Notion | str") -> "Notion":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(n.value for n in cls)
            raise UsageError(f"unknown fairness notion {value!r}; expected one of {names}") from None


CANDIDATE_MODES = ("full", "shrunk")
BOUND_METHODS = ("mc", "quad")


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GroupedScores:
    """Calibration scores partitioned by (label, group) and sorted.

    ``cells[i]`` holds the sorted scores of cell ``CELLS[i]``; use
    ``gs[y, a]`` for direct access.
    """

    cells: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]

    def __post_init__(self):
        if len(self.cells) != 4:
            raise UsageError("GroupedScores needs exactly four cells")
        frozen = []
        for cell in self.cells:
            arr = _frozen_array(cell)
            if arr.ndim != 1:
                raise UsageError("each cell must be one-dimensional")
            if arr.size and (np.any(np.diff(arr) < 0)):
                raise DomainError("cell scores must be sorted non-decreasing")
            if arr.size and (arr[0] < 0.0 or arr[-1] > 1.0 or not np.all(np.isfinite(arr))):
                raise DomainError("scores must lie in [0, 1]")
            frozen.append(arr)
        object.__setattr__(self, "cells", tuple(frozen))

    def __getitem__(self, key: tuple[int, int]) -> np.ndarray:
        y, a = key
        return self.cells[2 * y + a]

    def size(self, y: int, a: int) -> int:
        return int(self[y, a].size)

    @property
    def sizes(self) -> tuple[int, int, int, int]:
        """Counts ``(n00, n01, n10, n11)``."""
        return tuple(int(c.size) for c in self.cells)  # type: ignore[return-value]

    @property
    def n(self) -> int:
        return sum(self.sizes)

    def pooled(self, a: int) -> np.ndarray:
        """Sorted union of both label cells of group ``a``."""
        return np.sort(np.concatenate([self[0, a], self[1, a]]), kind="stable")

    def pooled_size(self, a: int) -> int:
        return self.size(0, a) + self.size(1, a)

    @classmethod
    def from_arrays(cls, scores, labels, groups) -> "GroupedScores":
        scores = np.asarray(scores, dtype=np.float64)
        labels = np.asarray(labels)
        groups = np.asarray(groups)
        if not (scores.shape == labels.shape == groups.shape) or scores.ndim != 1:
            raise UsageError("scores, labels and groups must be 1-D arrays of equal length")
        if not np.all(np.isfinite(scores)):
            raise DomainError("scores must be finite")
        if scores.size and (scores.min() < 0.0 or scores.max() > 1.0):
            raise DomainError("scores must lie in [0, 1]")
        for name, arr in (("label", labels), ("group", groups)):
            if arr.size and not np.all(np.isin(arr, (0, 1))):
                raise DomainError(f"{name} values must be 0 or 1")
        cells = tuple(
            np.sort(scores[(labels == y) & (groups == a)], kind="stable") for y, a in CELLS
        )
        return cls(cells)  # type: ignore[arg-type]


def validate_grouped_scores(raw: Iterable[tuple[float, int, int]]) -> GroupedScores:
    """Partition ``(score, y, a)`` triples into sorted per-cell sequences.

    Empty cells are allowed here; feasibility is checked at fit time.
    """
    rows = list(raw)
    if not rows:
        return GroupedScores.from_arrays([], [], [])
    scores, labels, groups = zip(*rows)
    return GroupedScores.from_arrays(scores, labels, groups)


@dataclass(frozen=True)
class PrevalenceEstimates:
    """Plug-in group proportions and conditional positive rates.

    ``p_a[a] = (n^{1,a} + n^{0,a}) / n`` and
    ``p_Ya[a] = n^{1,a} / (n^{0,a} + n^{1,a})``; an empty group gets
    ``p_Ya = 0``.
    """

    p_a: tuple[float, float]
    p_Ya: tuple[float, float]

    @classmethod
    def from_counts(cls, n00: int, n01: int, n10: int, n11: int) -> "PrevalenceEstimates":
        n = n00 + n01 + n10 + n11
        if n <= 0:
            raise DomainError("prevalence needs at least one calibration sample")
        group = (n00 + n10, n01 + n11)
        pos = (n10, n11)
        p_a = (group[0] / n, group[1] / n)
        p_Ya = tuple(pos[a] / group[a] if group[a] else 0.0 for a in (0, 1))
        return cls(p_a=p_a, p_Ya=p_Ya)  # type: ignore[arg-type]

    @classmethod
    def from_scores(cls, scores: GroupedScores) -> "PrevalenceEstimates":
        return cls.from_counts(*scores.sizes)


@dataclass(frozen=True)
class FairnessSpec:
    """What to guarantee and how to estimate the violation bounds.

    Parameters
    ----------
    notion : Notion or str
        One of eoo, eo, dp, pe, ea.
    alpha : float
        Allowed violation of the fairness gap, in (0, 1]. ``alpha = 1``
        is the vacuous constraint: every bound is 0.
    delta : float
        Allowed probability that the gap exceeds ``alpha``, in (0, 1).
    mc_samples : int
        Beta draws per bound term when ``bound_method="mc"``.
    seed : int
        Master seed for the keyed Monte Carlo streams.
    candidate_mode : {"full", "shrunk"}
        Exhaustive index pairs, or one paired index per positive-label
        score of group 0 (eoo and eo only).
    bound_method : {"mc", "quad"}
        Monte Carlo or 64-node Gauss-Legendre evaluation of each term.
    """

    notion: Notion
    alpha: float
    delta: float
    mc_samples: int = 1000
    seed: int = 0
    candidate_mode: str = "full"
    bound_method: str = "mc"

    def __post_init__(self):
        object.__setattr__(self, "notion", Notion.parse(self.notion))
        if not (0.0 < float(self.alpha) <= 1.0):
            raise DomainError(f"alpha must be in (0, 1], got {self.alpha}")
        if not (0.0 < float(self.delta) < 1.0):
            raise DomainError(f"delta must be in (0, 1), got {self.delta}")
        if int(self.mc_samples) < 1:
            raise DomainError("mc_samples must be >= 1")
        if self.candidate_mode not in CANDIDATE_MODES:
            raise UsageError(f"candidate_mode must be one of {CANDIDATE_MODES}")
        if self.bound_method not in BOUND_METHODS:
            raise UsageError(f"bound_method must be one of {BOUND_METHODS}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "mc_samples", int(self.mc_samples))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class CandidateEntry:
    """One threshold tuple and its violation-probability bound.

    ``k_10``/``k_11`` and ``k_00``/``k_01`` are ranks into the four cells.
    Which pair is the threshold-bearing one depends on the notion:
    (k_10, k_11) are 1-based order-statistic indices for eoo, eo and ea,
    with k_00/k_01 the derived 0-based counts of label-0 scores at or below
    the threshold. For pe the roles swap. For dp, ``k_pool`` holds the
    1-based indices into the pooled per-group sequences and all four cell
    ranks are derived counts.
    """

    k_10: int
    k_11: int
    k_00: int
    k_01: int
    bound: float
    est_error: Optional[float] = None
    k_pool: Optional[tuple[int, int]] = None

    def with_error(self, est_error: float) -> "CandidateEntry":
        return CandidateEntry(
            self.k_10, self.k_11, self.k_00, self.k_01, self.bound, est_error, self.k_pool
        )

    def index_key(self) -> tuple[int, ...]:
        pool = self.k_pool or (0, 0)
        return (*pool, self.k_10, self.k_11, self.k_00, self.k_01)


@dataclass(frozen=True)
class FittedClassifier:
    """Per-group thresholds plus the provenance of how they were chosen.

    Prediction is strict: ``1`` iff ``score > t_a``.
    """

    t0: float
    t1: float
    spec: FairnessSpec
    chosen: CandidateEntry
    calibration_sizes: tuple[int, int, int, int]
    n_evaluated: int = 0
    n_admissible: int = 0

    def threshold(self, group: int) -> float:
        return self.t1 if group == 1 else self.t0


@dataclass(frozen=True)
class FairnessReport:
    """Signed group-fairness gaps (group 1 minus group 0) and accuracy.

    A gap whose conditioning cell is empty in either group is ``None``.
    ``counts[(y, a)]`` is ``(members, predicted_positive)``.
    """

    deoo: Optional[float]
    dpe: Optional[float]
    ddp: Optional[float]
    dea: Optional[float]
    accuracy: Optional[float]
    counts: dict = field(default_factory=dict)

    @property
    def deo(self) -> tuple[Optional[float], Optional[float]]:
        return (self.deoo, self.dpe)

    @property
    def error_rate(self) -> Optional[float]:
        return None if self.accuracy is None else 1.0 - self.accuracy

    def as_dict(self) -> dict:
        return {
            "deoo": self.deoo,
            "deo": list(self.deo),
            "ddp": self.ddp,
            "dpe": self.dpe,
            "dea": self.dea,
            "accuracy": self.accuracy,
            "counts": {f"{y},{a}": list(v) for (y, a), v in sorted(self.counts.items())},
        }


def ceil_log_ratio(numerator_prob: float, base: float) -> int:
    """``ceil(log(numerator_prob) / log(base))`` with exact-integer snapping.

    The ratio is snapped to the nearest integer when it is within 1e-9 of
    one, so that e.g. ``log(0.25) / log(0.5)`` gives 2 rather than 3.
    """
    ratio = math.log(numerator_prob) / math.log(base)
    nearest = round(ratio)
    if abs(ratio - nearest) < 1e-9:
        return int(nearest)
    return int(math.ceil(ratio))
