"""CSV and JSON formats.

Score files have header ``score,label,group`` (``label`` may be omitted
for prediction inputs). Prediction files have header ``pred``. Feature
files written by the synthetic generator have ``x1..xd,label,group``.
All files are UTF-8 with LF line endings and ``.`` decimals.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import (
    CandidateEntry,
    DomainError,
    FairnessSpec,
    FittedClassifier,
    UsageError,
)

MODEL_FORMAT = "fairthresh-model/1"


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise UsageError(f"{path}: empty file") from None
            rows = [row for row in reader if row]
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    return header, rows


def _column(header, rows, name, path, convert):
    idx = header.index(name)
    out = []
    for lineno, row in enumerate(rows, start=2):
        try:
            out.append(convert(row[idx]))
        except (ValueError, IndexError):
            raise UsageError(f"{path}:{lineno}: bad {name} value") from None
    return out


def _binary(text: str) -> int:
    value = int(text.strip())
    if value not in (0, 1):
        raise ValueError(text)
    return value


def read_scores_csv(path, require_label: bool = True):
    """Read a score file.

    Returns
    -------
    scores, labels, groups : numpy arrays
        ``labels`` is ``None`` when the file has no label column and
        ``require_label`` is false.
    """
    header, rows = _read_rows(path)
    needed = ["score", "group"] + (["label"] if require_label else [])
    missing = [c for c in needed if c not in header]
    if missing:
        raise UsageError(f"{path}: missing column(s) {', '.join(missing)}; expected score,label,group")
    scores = np.array(_column(header, rows, "score", path, float), dtype=np.float64)
    if scores.size and (not np.all(np.isfinite(scores)) or scores.min() < 0 or scores.max() > 1):
        raise DomainError(f"{path}: scores must lie in [0, 1]")
    groups = np.array(_column(header, rows, "group", path, _binary), dtype=np.int8)
    labels = None
    if "label" in header:
        labels = np.array(_column(header, rows, "label", path, _binary), dtype=np.int8)
    return scores, labels, groups


def _fmt(x: float) -> str:
    return repr(float(x))


def write_scores_csv(path, scores, labels, groups) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["score", "label", "group"])
        for s, y, a in zip(scores, labels, groups):
            w.writerow([_fmt(s), int(y), int(a)])


def read_preds_csv(path) -> np.ndarray:
    header, rows = _read_rows(path)
    if "pred" not in header:
        raise UsageError(f"{path}: missing column pred")
    return np.array(_column(header, rows, "pred", path, _binary), dtype=np.int8)


def write_preds_csv(path, preds) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pred"])
        for p in preds:
            w.writerow([int(p)])


def write_features_csv(path, features, labels, groups) -> None:
    features = np.asarray(features)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{j + 1}" for j in range(features.shape[1])] + ["label", "group"])
        for row, y, a in zip(features, labels, groups):
            w.writerow([_fmt(v) for v in row] + [int(y), int(a)])


def read_dataset_csv(path):
    """Read either a score file or a feature file.

    Returns a ``ScoredData`` when the header has a ``score`` column and a
    ``LabeledData`` otherwise (all columns but label/group are features).
    """
    from .synth import LabeledData, ScoredData

    header, rows = _read_rows(path)
    if "score" in header:
        scores, labels, groups = read_scores_csv(path)
        return ScoredData(scores, labels, groups)
    if "label" not in header or "group" not in header:
        raise UsageError(f"{path}: need label and group columns")
    labels = np.array(_column(header, rows, "label", path, _binary), dtype=np.int8)
    groups = np.array(_column(header, rows, "group", path, _binary), dtype=np.int8)
    feat_cols = [h for h in header if h not in ("label", "group")]
    if not feat_cols:
        raise UsageError(f"{path}: no feature columns")
    features = np.column_stack(
        [np.array(_column(header, rows, c, path, float)) for c in feat_cols]
    )
    return LabeledData(features, labels, groups)


def _num(x: Optional[float]) -> str:
    """JSON number with 17 significant digits (lossless for doubles)."""
    if x is None:
        return "null"
    if not math.isfinite(x):
        raise DomainError("cannot serialize a non-finite number")
    return format(float(x), ".17g")


def model_to_json(model: FittedClassifier) -> str:
    """Serialize a fitted classifier; floats keep 17 significant digits."""
    c = model.chosen
    spec = model.spec
    # floats are spliced in as text so json does not shorten them
    fields = [
        ("format", json.dumps(MODEL_FORMAT)),
        ("notion", json.dumps(spec.notion.value)),
        ("alpha", _num(spec.alpha)),
        ("delta", _num(spec.delta)),
        ("seed", json.dumps(spec.seed)),
        ("mode", json.dumps(spec.candidate_mode)),
        ("bound_method", json.dumps(spec.bound_method)),
        ("mc_samples", json.dumps(spec.mc_samples)),
        ("t0", _num(model.t0)),
        ("t1", _num(model.t1)),
        ("k", json.dumps({"k_00": c.k_00, "k_01": c.k_01, "k_10": c.k_10, "k_11": c.k_11})),
        ("k_pool", json.dumps(list(c.k_pool) if c.k_pool is not None else None)),
        ("bound", _num(c.bound)),
        ("est_error", _num(c.est_error)),
        ("calibration_sizes", json.dumps(list(model.calibration_sizes))),
        ("n_evaluated", json.dumps(model.n_evaluated)),
        ("n_admissible", json.dumps(model.n_admissible)),
    ]
    body = ",\n".join(f"  {json.dumps(k)}: {v}" for k, v in fields)
    return "{\n" + body + "\n}\n"


def model_from_json(text: str) -> FittedClassifier:
    try:
        d = json.loads(text)
        spec = FairnessSpec(
            notion=d["notion"],
            alpha=d["alpha"],
            delta=d["delta"],
            mc_samples=d["mc_samples"],
            seed=d["seed"],
            candidate_mode=d["mode"],
            bound_method=d.get("bound_method", "mc"),
        )
        k = d["k"]
        chosen = CandidateEntry(
            k["k_10"], k["k_11"], k["k_00"], k["k_01"], d["bound"], d.get("est_error"),
            tuple(d["k_pool"]) if d.get("k_pool") is not None else None,
        )
        return FittedClassifier(
            t0=float(d["t0"]),
            t1=float(d["t1"]),
            spec=spec,
            chosen=chosen,
            calibration_sizes=tuple(d["calibration_sizes"]),
            n_evaluated=d.get("n_evaluated", 0),
            n_admissible=d.get("n_admissible", 0),
        )
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"malformed model file: {exc}") from None


def save_model(path, model: FittedClassifier) -> None:
    Path(path).write_text(model_to_json(model), encoding="utf-8")


def load_model(path) -> FittedClassifier:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    return model_from_json(text)


def write_bench_csv(path, rows: Sequence) -> None:
    """One line per spec; undefined aggregates are left empty."""
    from .synth import BenchmarkRow

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BenchmarkRow.COLUMNS)
        for r in rows:
            w.writerow(["" if v is None else (_fmt(v) if isinstance(v, float) else v) for v in r.values()])


def read_grid_json(path) -> list[FairnessSpec]:
    """A JSON list of objects with notion, alpha, delta and optional
    mode, mc_samples, seed, bound_method."""
    try:
        items = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc}") from None
    if isinstance(items, dict):
        items = [items]
    if not isinstance(items, list) or not items:
        raise UsageError(f"{path}: expected a non-empty list of specs")
    specs = []
    for item in items:
        try:
            specs.append(
                FairnessSpec(
                    notion=item["notion"],
                    alpha=item["alpha"],
                    delta=item["delta"],
                    mc_samples=item.get("mc_samples", 1000),
                    seed=item.get("seed", 0),
                    candidate_mode=item.get("mode", "full"),
                    bound_method=item.get("bound_method", "mc"),
                )
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise UsageError(f"{path}: bad spec entry {item!r}: {exc}") from None
    return specs
