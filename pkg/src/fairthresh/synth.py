"""Synthetic data models, a logistic base scorer and the repeated-split benchmark."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import expit

from .calibrate import fit
from .classify import fairness_metrics, predict_array, quantile_summary
from .core import (
    CELLS,
    DomainError,
    FairnessSpec,
    GroupedScores,
    InfeasibleError,
    NoAdmissibleCandidateError,
    UsageError,
)


@dataclass(frozen=True)
class FeatureLaw:
    """Per-coordinate feature distribution.

    ``kind`` is one of ``"t"``, ``"chi2"`` (``param`` = degrees of
    freedom), ``"normal_mu"`` or ``"laplace_mu"`` (unit scale, location
    ``mu ~ U(0, 1)`` drawn once per row).
    """

    kind: str
    param: float = 0.0

    def draw(self, rng: np.random.Generator, rows: int, dim: int) -> np.ndarray:
        if self.kind == "t":
            return rng.standard_t(self.param, size=(rows, dim))
        if self.kind == "chi2":
            return rng.chisquare(self.param, size=(rows, dim))
        if self.kind in ("normal_mu", "laplace_mu"):
            mu = rng.random(rows)[:, None]
            if self.kind == "normal_mu":
                return rng.normal(mu, 1.0, size=(rows, dim))
            return rng.laplace(mu, 1.0, size=(rows, dim))
        raise UsageError(f"unknown feature law {self.kind!r}")


@dataclass(frozen=True)
class SyntheticModelSpec:
    """Group/label probabilities and per-cell feature laws.

    ``laws`` follows the cell order ``(0,0), (0,1), (1,0), (1,1)`` of
    ``(y, a)``. ``p_Y[a] = P(Y=1 | A=a)``.
    """

    model_id: int
    dimension: int
    p_1: float
    p_Y: tuple[float, float]
    laws: tuple[FeatureLaw, FeatureLaw, FeatureLaw, FeatureLaw]

    def __post_init__(self):
        assert 0.0 < self.p_1 < 1.0
        assert len(self.laws) == 4
        assert self.dimension >= 1

    @property
    def p_0(self) -> float:
        return 1.0 - self.p_1


_P1 = 0.7
_PY = (0.4, 0.7)

MODELS: dict[int, SyntheticModelSpec] = {
    1: SyntheticModelSpec(
        1, 60, _P1, _PY,
        (FeatureLaw("t", 3), FeatureLaw("chi2", 1), FeatureLaw("chi2", 3), FeatureLaw("normal_mu")),
    ),
    2: SyntheticModelSpec(
        2, 80, _P1, _PY,
        (FeatureLaw("t", 4), FeatureLaw("chi2", 2), FeatureLaw("chi2", 4), FeatureLaw("laplace_mu")),
    ),
    3: SyntheticModelSpec(
        3, 60, _P1, _PY,
        (FeatureLaw("t", 1), FeatureLaw("t", 4), FeatureLaw("chi2", 1), FeatureLaw("chi2", 4)),
    ),
}


def get_model(model: Union[int, SyntheticModelSpec]) -> SyntheticModelSpec:
    if isinstance(model, SyntheticModelSpec):
        return model
    try:
        return MODELS[int(model)]
    except (KeyError, ValueError, TypeError):
        raise UsageError(f"unknown synthetic model {model!r}; expected 1, 2 or 3") from None


@dataclass(frozen=True)
class LabeledData:
    """Feature rows with labels ``y`` and protected attribute ``a``."""

    features: np.ndarray
    y: np.ndarray
    a: np.ndarray

    def __len__(self) -> int:
        return int(self.y.size)

    def take(self, idx) -> "LabeledData":
        return LabeledData(self.features[idx], self.y[idx], self.a[idx])


@dataclass(frozen=True)
class ScoredData:
    """Pre-computed scores with labels and groups (no training step)."""

    scores: np.ndarray
    y: np.ndarray
    a: np.ndarray

    def __len__(self) -> int:
        return int(self.y.size)

    def take(self, idx) -> "ScoredData":
        return ScoredData(self.scores[idx], self.y[idx], self.a[idx])


def synth_generate(model: Union[int, SyntheticModelSpec], n: int, seed) -> LabeledData:
    """Draw ``n`` labeled rows from a synthetic model.

    ``A ~ Bernoulli(p_1)``, ``Y | A=a ~ Bernoulli(p_Y[a])``, then each
    feature coordinate i.i.d. from the law of the row's ``(y, a)`` cell.
    """
    spec = get_model(model)
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = np.random.default_rng(seed)
    a = (rng.random(n) < spec.p_1).astype(np.int8)
    p_y = np.where(a == 1, spec.p_Y[1], spec.p_Y[0])
    y = (rng.random(n) < p_y).astype(np.int8)
    x = np.empty((n, spec.dimension))
    for law, (yy, aa) in zip(spec.laws, CELLS):
        rows = np.flatnonzero((y == yy) & (a == aa))
        if rows.size:
            x[rows] = law.draw(rng, rows.size, spec.dimension)
    return LabeledData(x, y, a)


@dataclass(frozen=True)
class LogisticScorer:
    """Standardized-feature logistic model over ``(features, a)``."""

    center: np.ndarray
    scale: np.ndarray
    coef: np.ndarray
    intercept: float

    def _design(self, features, a) -> np.ndarray:
        x = np.column_stack([np.asarray(features, dtype=np.float64), np.asarray(a, dtype=np.float64)])
        return (x - self.center) / self.scale

    def score(self, features, a) -> np.ndarray:
        """Scores in [0, 1]."""
        return expit(self._design(features, a) @ self.coef + self.intercept)

    __call__ = score


def train_base_scorer(
    features,
    a,
    y,
    lr: float = 0.1,
    iterations: int = 500,
    l2: float = 1e-2,
) -> LogisticScorer:
    """Fit an L2-regularized logistic regression by full-batch gradient descent.

    Features and the group column are standardized with training moments;
    weights start at zero, so the fit is deterministic.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0 or np.unique(y).size < 2:
        raise UsageError("training data must contain both labels")
    x = np.column_stack([np.asarray(features, dtype=np.float64), np.asarray(a, dtype=np.float64)])
    center = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0.0] = 1.0
    z = (x - center) / scale
    n, d = z.shape
    w = np.zeros(d)
    b = 0.0
    for _ in range(iterations):
        p = expit(z @ w + b)
        r = p - y
        w -= lr * (z.T @ r / n + l2 * w)
        b -= lr * r.mean()
    return LogisticScorer(center, scale, w, float(b))


@dataclass(frozen=True)
class RepetitionResult:
    """Per-spec outcome of one repetition; ``status`` is ok/infeasible/no_candidate."""

    rep: int
    status: tuple[str, ...]
    abs_deoo: tuple[Optional[float], ...]
    abs_dpe: tuple[Optional[float], ...]
    accuracy: tuple[Optional[float], ...]


@dataclass(frozen=True)
class BenchmarkRow:
    notion: str
    alpha: float
    delta: float
    mode: str
    repetitions: int
    feasible: int
    infeasible: int
    no_candidate: int
    mean_abs_deoo: Optional[float]
    q95_abs_deoo: Optional[float]
    mean_abs_dpe: Optional[float]
    q95_abs_dpe: Optional[float]
    mean_accuracy: Optional[float]

    COLUMNS = (
        "notion", "alpha", "delta", "mode", "repetitions", "feasible", "infeasible",
        "no_candidate", "mean_abs_deoo", "q95_abs_deoo", "mean_abs_dpe", "q95_abs_dpe",
        "mean_accuracy",
    )

    def values(self) -> tuple:
        return tuple(getattr(self, c) for c in self.COLUMNS)


@dataclass(frozen=True)
class _RepTask:
    source: object
    specs: tuple
    rep: int
    seed: int
    n: int
    split: tuple
    holdout_n: Optional[int]


def _split_indices(rng: np.random.Generator, size: int, fractions: Sequence[float]) -> list[np.ndarray]:
    perm = rng.permutation(size)
    cuts = np.floor(np.cumsum(fractions)[:-1] * size + 1e-9).astype(int)
    return np.split(perm, cuts)


def run_repetition(task: _RepTask) -> RepetitionResult:
    """One split / train / fit / evaluate cycle for every spec."""
    ss = np.random.SeedSequence([task.seed % 2**64, task.rep])
    data_seed, split_seed, holdout_seed = ss.spawn(3)
    source = task.source
    if isinstance(source, ScoredData):
        data = source
        cal_frac, test_frac = task.split[1], task.split[2]
        total = cal_frac + test_frac
        cal_idx, test_idx = _split_indices(
            np.random.default_rng(split_seed), len(data), (cal_frac / total, test_frac / total)
        )
        cal, test = data.take(cal_idx), data.take(test_idx)
        cal_scores, test_scores = cal.scores, test.scores
        test_y, test_a = test.y, test.a
    else:
        if isinstance(source, LabeledData):
            data = source
        else:
            data = synth_generate(source, task.n, data_seed)
        train_idx, cal_idx, test_idx = _split_indices(
            np.random.default_rng(split_seed), len(data), task.split
        )
        train, cal = data.take(train_idx), data.take(cal_idx)
        if task.holdout_n and not isinstance(source, LabeledData):
            test = synth_generate(source, task.holdout_n, holdout_seed)
        else:
            test = data.take(test_idx)
        scorer = train_base_scorer(train.features, train.a, train.y)
        cal_scores = scorer.score(cal.features, cal.a)
        test_scores = scorer.score(test.features, test.a)
        test_y, test_a = test.y, test.a
    grouped = GroupedScores.from_arrays(cal_scores, cal.y, cal.a)

    status, deoo, dpe, acc = [], [], [], []
    for spec in task.specs:
        try:
            model = fit(spec.notion, grouped, spec)
        except InfeasibleError:
            status.append("infeasible")
        except NoAdmissibleCandidateError:
            status.append("no_candidate")
        else:
            report = fairness_metrics(predict_array(model, test_scores, test_a), test_y, test_a)
            status.append("ok")
            deoo.append(None if report.deoo is None else abs(report.deoo))
            dpe.append(None if report.dpe is None else abs(report.dpe))
            acc.append(report.accuracy)
            continue
        deoo.append(None)
        dpe.append(None)
        acc.append(None)
    return RepetitionResult(task.rep, tuple(status), tuple(deoo), tuple(dpe), tuple(acc))


def _mean(values: list[float]) -> Optional[float]:
    return math.fsum(values) / len(values) if values else None


def _q95(values: list[float]) -> Optional[float]:
    return quantile_summary(values, 0.95) if values else None


def aggregate(specs: Sequence[FairnessSpec], results: Sequence[RepetitionResult]) -> list[BenchmarkRow]:
    """Summary row per spec; independent of the order of ``results``."""
    rows = []
    for j, spec in enumerate(specs):
        statuses = [r.status[j] for r in results]
        ok = [r for r in results if r.status[j] == "ok"]
        deoo = sorted(r.abs_deoo[j] for r in ok if r.abs_deoo[j] is not None)
        dpe = sorted(r.abs_dpe[j] for r in ok if r.abs_dpe[j] is not None)
        acc = sorted(r.accuracy[j] for r in ok if r.accuracy[j] is not None)
        rows.append(
            BenchmarkRow(
                notion=spec.notion.value,
                alpha=spec.alpha,
                delta=spec.delta,
                mode=spec.candidate_mode,
                repetitions=len(results),
                feasible=len(ok),
                infeasible=statuses.count("infeasible"),
                no_candidate=statuses.count("no_candidate"),
                mean_abs_deoo=_mean(deoo),
                q95_abs_deoo=_q95(deoo),
                mean_abs_dpe=_mean(dpe),
                q95_abs_dpe=_q95(dpe),
                mean_accuracy=_mean(acc),
            )
        )
    return rows


def run_benchmark(
    source: Union[int, SyntheticModelSpec, LabeledData, ScoredData],
    specs: Sequence[FairnessSpec],
    repetitions: int,
    split: Sequence[float] = (0.4, 0.4, 0.2),
    seed: int = 0,
    n: int = 1000,
    holdout_n: Optional[int] = None,
    workers: int = 1,
) -> list[BenchmarkRow]:
    """Repeated split / train / calibrate / evaluate over a grid of specs.

    Parameters
    ----------
    source : int, SyntheticModelSpec, LabeledData or ScoredData
        A synthetic model (fresh ``n`` rows per repetition), a fixed
        feature dataset, or pre-scored rows. For scored rows the training
        fraction is dropped and the other two are renormalized.
    specs : sequence of FairnessSpec
    repetitions : int
    split : (train, calibration, test) fractions
    seed : int
        Master seed; repetition ``r`` uses streams derived from ``(seed, r)``.
    n : int
        Rows per synthetic draw.
    holdout_n : int, optional
        For synthetic models, evaluate on a fresh draw of this many rows
        instead of the test split, which approximates population metrics.
    workers : int
        Processes; the output does not depend on it.
    """
    if repetitions < 1:
        raise UsageError("repetitions must be >= 1")
    split = tuple(float(s) for s in split)
    if len(split) != 3 or min(split) <= 0.0 or abs(sum(split) - 1.0) > 1e-9:
        raise UsageError("split must be three positive fractions summing to 1")
    if not isinstance(source, (LabeledData, ScoredData)):
        source = get_model(source)
    specs = tuple(specs)
    if not specs:
        raise UsageError("at least one FairnessSpec is required")
    tasks = [_RepTask(source, specs, r, int(seed), int(n), split, holdout_n) for r in range(repetitions)]
    if workers > 1 and repetitions > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(run_repetition, tasks))
    else:
        results = [run_repetition(t) for t in tasks]
    return aggregate(specs, results)


def format_table(rows: Sequence[BenchmarkRow]) -> str:
    """Plain-text summary, one line per spec."""
    head = f"{'method':<12}{'alpha':>7}{'|DEOO|':>9}{'|DEOO|95':>10}{'|DPE|':>9}{'|DPE|95':>10}{'ACC':>8}{'infeas':>8}"
    lines = [head]

    def cell(v, width):
        return f"{'/':>{width}}" if v is None else f"{v:>{width}.3f}"

    for r in rows:
        name = f"{r.notion.upper()}-{r.mode}"
        lines.append(
            f"{name:<12}{r.alpha:>7.3g}{cell(r.mean_abs_deoo, 9)}{cell(r.q95_abs_deoo, 10)}"
            f"{cell(r.mean_abs_dpe, 9)}{cell(r.q95_abs_dpe, 10)}{cell(r.mean_accuracy, 8)}"
            f"{r.infeasible + r.no_candidate:>8d}"
        )
    return "\n".join(lines)
