"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Model 1 reference values at alpha = 0.12: EOO |DEOO|95 0.115 and accuracy
0.657; EO |DEOO|95 0.108 and |DPE|95 0.084.
"""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy import stats

from fairthresh.bounds import binom_tail, boundary_bound, min_sample_size, violation_bound
from fairthresh.calibrate import fit
from fairthresh.core import (
    CandidateEntry,
    FairnessSpec,
    GroupedScores,
    InfeasibleError,
    NoAdmissibleCandidateError,
)
from fairthresh.io import write_scores_csv
from fairthresh.synth import run_benchmark, synth_generate, train_base_scorer

# per-cell score laws (y, a) -> Beta shape, in cell order 00, 01, 10, 11
SCORE_LAWS = ((2, 5), (2, 3), (4, 2), (5, 2))


def direct_tail(n, p, k):
    return math.fsum(math.comb(n, j) * p**j * (1 - p) ** (n - j) for j in range(k, n + 1))


def draw_cells(rng, n):
    return GroupedScores(tuple(np.sort(rng.beta(a, b, n)) for a, b in SCORE_LAWS))


def cell_cdf(cell, t):
    a, b = SCORE_LAWS[cell]
    return float(stats.beta.cdf(t, a, b))


def test_criterion_1_binomial_tail(verdict):
    start = time.perf_counter()
    p = np.round(np.arange(101) * 0.01, 2)
    worst = 0.0
    for n in range(0, 31):
        k = np.arange(n + 1)
        got = binom_tail(n, p[:, None], k[None, :])
        ref = np.array([[direct_tail(n, float(pp), int(kk)) for kk in k] for pp in p])
        worst = max(worst, float(np.max(np.abs(got - ref))))
    elapsed = time.perf_counter() - start
    verdict(1, worst <= 1e-10 and elapsed < 5, f"max |error| = {worst:.2e} (<= 1e-10), {elapsed:.1f}s (< 5s)")


def test_criterion_2_order_statistic_law(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    n, reps = 50, 2000
    # a non-uniform continuous score law, mapped back through its CDF
    law = stats.gamma(2.5)
    samples = np.sort(law.rvs(size=(reps, n), random_state=rng), axis=1)
    pvals = {}
    for k in (1, 25, 50):
        u = law.cdf(samples[:, k - 1])
        pvals[k] = stats.kstest(u, stats.beta(k, n - k + 1).cdf).pvalue
    elapsed = time.perf_counter() - start
    ok = all(v > 0.01 for v in pvals.values()) and elapsed < 30
    detail = ", ".join(f"k={k}: p={v:.3f}" for k, v in pvals.items())
    verdict(2, ok, f"KS {detail} (all > 0.01), {elapsed:.1f}s (< 30s)")


def test_criterion_3_bound_tightness(verdict):
    start = time.perf_counter()
    n, alpha, k, reps = 20, 0.2, 15, 10_000
    rng = np.random.default_rng(7)
    t0 = np.sort(rng.random((reps, n)), axis=1)[:, k - 1]
    t1 = np.sort(rng.random((reps, n)), axis=1)[:, k - 1]
    # uniform scores: TPR_a = 1 - t_a, so DEOO = t0 - t1
    freq = float(np.mean(np.abs(t0 - t1) > alpha))

    filler = np.linspace(0.05, 0.95, n)
    gs = GroupedScores((filler, filler, filler, filler))
    cand = CandidateEntry(k, k, 0, 0, 0.0)
    bound = violation_bound("eoo", cand, gs, None, FairnessSpec("eoo", alpha, 0.1))
    # Monte Carlo spread of the bound across independent streams
    spread = [violation_bound("eoo", cand, gs, None, FairnessSpec("eoo", alpha, 0.1, seed=s)) for s in range(1, 41)]
    se_mc = float(np.std(spread, ddof=1))
    se_emp = math.sqrt(freq * (1 - freq) / reps)
    se = math.sqrt(se_mc**2 + se_emp**2)
    exact = violation_bound("eoo", cand, gs, None, FairnessSpec("eoo", alpha, 0.1, bound_method="quad"))
    elapsed = time.perf_counter() - start
    ok = abs(freq - bound) <= 3 * se and elapsed < 120
    verdict(
        3, ok,
        f"empirical {freq:.4f} vs bound {bound:.4f} (quadrature {exact:.4f}); "
        f"|diff| = {abs(freq - bound):.4f} <= 3 SE = {3 * se:.4f}; {elapsed:.0f}s (< 120s)",
    )


def _coverage(notion, reps, rng):
    violations = 0
    failures = 0
    for r in range(reps):
        gs = draw_cells(rng, 100)
        try:
            model = fit(notion, gs, FairnessSpec(notion, 0.12, 0.1, seed=r))
        except NoAdmissibleCandidateError:
            failures += 1
            continue
        deoo = cell_cdf(2, model.t0) - cell_cdf(3, model.t1)
        dpe = cell_cdf(0, model.t0) - cell_cdf(1, model.t1)
        gap = abs(deoo) if notion == "eoo" else max(abs(deoo), abs(dpe))
        violations += gap > 0.12
    return violations / reps, failures


def test_criterion_4_finite_sample_guarantee(verdict):
    start = time.perf_counter()
    reps = 500
    limit = 0.1 + 3 * math.sqrt(0.1 * 0.9 / reps)
    rate_eoo, fail_eoo = _coverage("eoo", reps, np.random.default_rng(41))
    rate_eo, fail_eo = _coverage("eo", reps, np.random.default_rng(42))
    elapsed = time.perf_counter() - start
    ok = rate_eoo <= limit and rate_eo <= limit and elapsed < 600
    verdict(
        4, ok,
        f"violation rate EOO {rate_eoo:.3f}, EO {rate_eo:.3f} (<= {limit:.4f}); "
        f"fits with no candidate: {fail_eoo}, {fail_eo}; {elapsed:.0f}s (< 600s)",
    )


def _brute_force_minimum(notion, alpha, delta):
    n = 1
    while boundary_bound(notion, n, alpha, method="quad") > delta:
        n += 1
    return n


def test_criterion_5_sample_complexity_table(verdict):
    start = time.perf_counter()
    mismatches = []
    checked = 0
    for notion in ("eoo", "eo", "dp", "pe"):
        for alpha in (0.08, 0.12, 0.16):
            for delta in (0.05, 0.1):
                formula = max(min_sample_size(notion, alpha, delta).minima.values())
                brute = _brute_force_minimum(notion, alpha, delta)
                checked += 1
                if formula != brute:
                    mismatches.append(f"{notion} a={alpha} d={delta}: formula {formula}, brute {brute}")
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 60
    detail = f"{checked - len(mismatches)}/{checked} grid points equal; {elapsed:.1f}s (< 60s)"
    if mismatches:
        detail += "; " + "; ".join(mismatches[:4]) + (" ..." if len(mismatches) > 4 else "")
    verdict(5, ok, detail)


def test_criterion_6_model1_table(verdict):
    start = time.perf_counter()
    specs = [FairnessSpec("eoo", 0.12, 0.05), FairnessSpec("eo", 0.12, 0.05)]
    eoo, eo = run_benchmark(1, specs, repetitions=100, seed=2023, n=1000, holdout_n=20_000)
    elapsed = time.perf_counter() - start
    checks = {
        "EOO |DEOO|95 <= 0.12": eoo.q95_abs_deoo is not None and eoo.q95_abs_deoo <= 0.12,
        "EOO |DEOO|95 within 0.04 of 0.115": eoo.q95_abs_deoo is not None and abs(eoo.q95_abs_deoo - 0.115) <= 0.04,
        "EOO ACC within 0.05 of 0.657": eoo.mean_accuracy is not None and abs(eoo.mean_accuracy - 0.657) <= 0.05,
        "EO |DEOO|95 <= 0.12": eo.q95_abs_deoo is not None and eo.q95_abs_deoo <= 0.12,
        "EO |DPE|95 <= 0.12": eo.q95_abs_dpe is not None and eo.q95_abs_dpe <= 0.12,
        "EO |DEOO|95 within 0.04 of 0.108": eo.q95_abs_deoo is not None and abs(eo.q95_abs_deoo - 0.108) <= 0.04,
        "EO |DPE|95 within 0.04 of 0.084": eo.q95_abs_dpe is not None and abs(eo.q95_abs_dpe - 0.084) <= 0.04,
        "runtime < 30 min": elapsed < 1800,
    }
    failed = [k for k, v in checks.items() if not v]

    def f(x):
        return "n/a" if x is None else f"{x:.3f}"

    detail = (
        f"EOO |DEOO|95 {f(eoo.q95_abs_deoo)}, ACC {f(eoo.mean_accuracy)} "
        f"(feasible {eoo.feasible}/100); EO |DEOO|95 {f(eo.q95_abs_deoo)}, |DPE|95 {f(eo.q95_abs_dpe)}, "
        f"ACC {f(eo.mean_accuracy)} (feasible {eo.feasible}/100); {elapsed:.0f}s"
    )
    if failed:
        detail += "; failed: " + ", ".join(failed)
    verdict(6, not failed, detail)


def test_criterion_7_error_estimate(verdict):
    start = time.perf_counter()
    rng = np.random.default_rng(77)
    n, trials = 400, 200
    tol = 3 / math.sqrt(n)
    within = 0
    worst = 0.0
    for t in range(trials):
        gs = draw_cells(rng, n)
        model = fit("eoo", gs, FairnessSpec("eoo", 0.12, 0.1, bound_method="quad"))
        # population with equal cell probabilities, matching n^{y,a} = n
        true_err = 0.25 * (
            cell_cdf(2, model.t0) + cell_cdf(3, model.t1)
            + (1 - cell_cdf(0, model.t0)) + (1 - cell_cdf(1, model.t1))
        )
        diff = abs(model.chosen.est_error - true_err)
        worst = max(worst, diff)
        within += diff <= tol
    elapsed = time.perf_counter() - start
    frac = within / trials
    verdict(
        7, frac >= 0.95 and elapsed < 300,
        f"{within}/{trials} trials with |e_hat - e| <= {tol:.3f} (>= 95%), worst {worst:.4f}; {elapsed:.0f}s (< 300s)",
    )


def test_criterion_8_shrunk_quality(verdict):
    start = time.perf_counter()
    reps = 50
    gaps = []
    count_ok = True
    skipped = 0
    for r in range(reps):
        data = synth_generate(1, 1000, np.random.SeedSequence([8, r]))
        perm = np.random.default_rng(r).permutation(1000)
        train, cal = perm[:400], perm[400:800]
        scorer = train_base_scorer(data.features[train], data.a[train], data.y[train])
        scores = scorer.score(data.features[cal], data.a[cal])
        gs = GroupedScores.from_arrays(scores, data.y[cal], data.a[cal])
        try:
            full = fit("eoo", gs, FairnessSpec("eoo", 0.12, 0.1))
            shrunk = fit("eoo", gs, FairnessSpec("eoo", 0.12, 0.1, candidate_mode="shrunk"))
        except (InfeasibleError, NoAdmissibleCandidateError):
            skipped += 1
            continue
        n10, n11 = gs.size(1, 0), gs.size(1, 1)
        count_ok &= shrunk.n_evaluated <= n10 and full.n_evaluated <= n10 * n11
        gaps.append(shrunk.chosen.est_error - full.chosen.est_error)
    elapsed = time.perf_counter() - start
    mean_gap = float(np.mean(gaps)) if gaps else float("nan")
    ok = bool(gaps) and mean_gap <= 0.02 and count_ok and elapsed < 1200
    verdict(
        8, ok,
        f"mean e_hat(shrunk) - min e_hat(full) = {mean_gap:.4f} (<= 0.02) over {len(gaps)} reps "
        f"({skipped} skipped); shrunk count <= n^(1,0): {count_ok}; {elapsed:.0f}s (< 1200s)",
    )


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "fairthresh", *args], capture_output=True, check=False)


def test_criterion_9_determinism(verdict, tmp_path):
    rng = np.random.default_rng(9)
    n = 900
    y = rng.integers(0, 2, n)
    a = rng.integers(0, 2, n)
    s = np.clip(0.3 * y + 0.7 * rng.beta(2, 2, n), 0, 1)
    scores = tmp_path / "cal.csv"
    write_scores_csv(scores, s, y, a)
    grid = tmp_path / "grid.json"
    grid.write_text(
        '[{"notion": "eoo", "alpha": 0.12, "delta": 0.1}, {"notion": "eo", "alpha": 0.12, "delta": 0.1, "mode": "shrunk"}]',
        encoding="utf-8",
    )
    max_workers = str(max(4, os.cpu_count() or 1))
    outputs = {}
    for tag, workers in (("a", "1"), ("b", "1"), ("c", max_workers)):
        model = tmp_path / f"model_{tag}.json"
        table = tmp_path / f"bench_{tag}.csv"
        r1 = _cli("fit", "--notion", "eo", "--alpha", "0.12", "--delta", "0.1", "--scores", str(scores),
                  "--seed", "5", "--workers", workers, "--out", str(model))
        r2 = _cli("bench", "--model", "1", "--grid", str(grid), "--reps", "4", "--seed", "5", "--n", "1000",
                  "--workers", workers, "--out", str(table))
        assert r1.returncode == 0 and r2.returncode == 0, (r1.stderr, r2.stderr)
        outputs[tag] = (model.read_bytes(), r1.stdout, table.read_bytes(), r2.stdout)
    same = outputs["a"] == outputs["b"] == outputs["c"]
    verdict(9, same, f"fit and bench outputs byte-identical across 3 runs (workers 1, 1, {max_workers}): {same}")
