"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 calibration sample too small,
4 no admissible candidate.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import io as fio
from .bounds import min_sample_size
from .calibrate import fit
from .classify import fairness_metrics, predict_array
from .core import (
    FairnessSpec,
    FairThreshError,
    GroupedScores,
    InfeasibleError,
    NoAdmissibleCandidateError,
    Notion,
    PrevalenceEstimates,
    UsageError,
)
from .synth import format_table, run_benchmark, synth_generate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_NO_CANDIDATE = 4

_CELL_GROUPS = {
    Notion.EOO: "n^{1,a}",
    Notion.PE: "n^{0,a}",
    Notion.DP: "n^{a}",
    Notion.EO: "n^{y,a}",
}


def _parse_counts(text: str) -> tuple[int, int, int, int]:
    try:
        parts = [int(p) for p in text.split(",")]
    except ValueError:
        raise UsageError("--counts expects four integers n00,n01,n10,n11") from None
    if len(parts) != 4 or min(parts) < 0:
        raise UsageError("--counts expects four non-negative integers n00,n01,n10,n11")
    return tuple(parts)  # type: ignore[return-value]


def _cmd_check(args) -> int:
    notion = Notion.parse(args.notion)
    counts = _parse_counts(args.counts) if args.counts else None
    p_Y = None
    if notion is Notion.EA:
        if counts is None:
            raise UsageError("check for ea needs --counts to estimate the positive rates")
        p_Y = PrevalenceEstimates.from_counts(*counts).p_Ya
    req = min_sample_size(notion, args.alpha, args.delta, p_Y)
    values = set(req.minima.values())
    if notion in _CELL_GROUPS and len(values) == 1:
        print(f"minimum {_CELL_GROUPS[notion]} = {values.pop()}")
    else:
        for (y, a), m in sorted(req.minima.items(), key=str):
            print(f"minimum n^{{{y},{a}}} = {m}")
    if counts is None:
        return EXIT_OK
    gs = GroupedScores(tuple([0.0] * c for c in counts))  # type: ignore[arg-type]
    short = req.shortfalls(gs)
    if not short:
        print("feasible")
        return EXIT_OK
    desc = ", ".join(f"n^{{{y},{a}}}={got} < {need}" for (y, a), (need, got) in short.items())
    print(f"infeasible: {desc}")
    return EXIT_INFEASIBLE


def _spec_from_args(args) -> FairnessSpec:
    return FairnessSpec(
        notion=args.notion,
        alpha=args.alpha,
        delta=args.delta,
        mc_samples=args.mc,
        seed=args.seed,
        candidate_mode=args.mode,
        bound_method=args.method,
    )


def _cmd_fit(args) -> int:
    spec = _spec_from_args(args)
    scores, labels, groups = fio.read_scores_csv(args.scores)
    grouped = GroupedScores.from_arrays(scores, labels, groups)
    model = fit(spec.notion, grouped, spec, workers=args.workers)
    fio.save_model(args.out, model)
    print(
        f"t0={model.t0!r} t1={model.t1!r} bound={model.chosen.bound!r} "
        f"est_error={model.chosen.est_error!r} candidates={model.n_admissible}/{model.n_evaluated}"
    )
    return EXIT_OK


def _cmd_predict(args) -> int:
    model = fio.load_model(args.model)
    scores, _, groups = fio.read_scores_csv(args.scores, require_label=False)
    fio.write_preds_csv(args.out, predict_array(model, scores, groups))
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    preds = fio.read_preds_csv(args.preds)
    _, labels, groups = fio.read_scores_csv(args.truth)
    if preds.size != labels.size:
        raise UsageError(f"{args.preds} has {preds.size} rows but {args.truth} has {labels.size}")
    report = fairness_metrics(preds, labels, groups)
    print(json.dumps(report.as_dict(), indent=2))
    return EXIT_OK


def _cmd_synth(args) -> int:
    data = synth_generate(args.model, args.n, args.seed)
    fio.write_features_csv(args.out, data.features, data.y, data.a)
    return EXIT_OK


def _cmd_bench(args) -> int:
    specs = fio.read_grid_json(args.grid)
    if args.data is not None:
        source = fio.read_dataset_csv(args.data)
    else:
        source = args.model
    split = tuple(float(s) for s in args.split.split(","))
    rows = run_benchmark(
        source, specs, args.reps, split=split, seed=args.seed, n=args.n,
        holdout_n=args.holdout, workers=args.workers,
    )
    fio.write_bench_csv(args.out, rows)
    print(format_table(rows))
    return EXIT_OK


def _add_spec_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--notion", required=True, choices=[n.value for n in Notion])
    p.add_argument("--alpha", required=True, type=float)
    p.add_argument("--delta", required=True, type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairthresh",
        description="Group-wise thresholds with finite-sample fairness guarantees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="minimum calibration sizes for a guarantee")
    _add_spec_args(p)
    p.add_argument("--counts", help="n00,n01,n10,n11 to test for feasibility")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("fit", help="calibrate thresholds from a score file")
    _add_spec_args(p)
    p.add_argument("--scores", required=True, help="CSV with score,label,group")
    p.add_argument("--mode", default="full", choices=["full", "shrunk"])
    p.add_argument("--mc", type=int, default=1000, help="Monte Carlo draws per bound term")
    p.add_argument("--method", default="mc", choices=["mc", "quad"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("predict", help="apply a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--scores", required=True, help="CSV with score,group (label optional)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("evaluate", help="fairness report for predictions")
    p.add_argument("--preds", required=True)
    p.add_argument("--truth", required=True, help="CSV with label and group columns")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--model", required=True, type=int, choices=[1, 2, 3])
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("bench", help="repeated split benchmark over a spec grid")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", type=int, choices=[1, 2, 3])
    src.add_argument("--data", help="score CSV or feature CSV")
    p.add_argument("--grid", required=True, help="JSON list of specs")
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=1000, help="rows per synthetic draw")
    p.add_argument("--holdout", type=int, default=None, help="fresh synthetic rows for evaluation")
    p.add_argument("--split", default="0.4,0.4,0.2", help="train,calibration,test fractions")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NoAdmissibleCandidateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CANDIDATE
    except (FairThreshError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
