import math

import numpy as np
import pytest

from fairthresh.core import FairnessSpec, UsageError
from fairthresh.synth import (
    MODELS,
    RepetitionResult,
    ScoredData,
    aggregate,
    format_table,
    get_model,
    run_benchmark,
    synth_generate,
    train_base_scorer,
)


class TestGenerate:
    def test_group_frequency(self):
        n = 100_000
        data = synth_generate(1, n, 0)
        band = 3 * math.sqrt(0.21 / n)
        assert abs(data.a.mean() - 0.7) <= band

    def test_cell_frequencies(self):
        n = 100_000
        data = synth_generate(2, n, 1)
        for a, p_a in ((0, 0.3), (1, 0.7)):
            p_y = MODELS[2].p_Y[a]
            for y, p_y_cell in ((0, 1 - p_y), (1, p_y)):
                p = p_a * p_y_cell
                freq = np.mean((data.y == y) & (data.a == a))
                assert abs(freq - p) <= 3 * math.sqrt(p * (1 - p) / n)

    def test_dimensions(self):
        assert synth_generate(2, 7, 0).features.shape == (7, 80)
        assert synth_generate(1, 3, 0).features.shape == (3, 60)
        assert synth_generate(3, 3, 0).features.shape == (3, 60)

    def test_deterministic(self):
        a = synth_generate(3, 50, 42)
        b = synth_generate(3, 50, 42)
        assert np.array_equal(a.features, b.features) and np.array_equal(a.y, b.y)

    def test_unknown_model(self):
        with pytest.raises(UsageError):
            get_model(4)

    def test_cell_laws(self):
        # chi-square cells are non-negative, the normal cell is not
        data = synth_generate(1, 2000, 3)
        assert data.features[(data.y == 1) & (data.a == 0)].min() >= 0
        assert data.features[(data.y == 0) & (data.a == 1)].min() >= 0
        assert data.features[(data.y == 1) & (data.a == 1)].min() < 0
        # the per-row location is shared across a row's coordinates
        row_means = data.features[(data.y == 1) & (data.a == 1)].mean(axis=1)
        assert 0.2 < row_means.std() < 0.4


class TestScorer:
    def test_separable(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(200, 2))
        y = (x[:, 0] + x[:, 1] > 0).astype(int)
        a = rng.integers(0, 2, 200)
        s = train_base_scorer(x, a, y)
        acc = np.mean((s.score(x, a) > 0.5) == y)
        assert acc >= 0.95

    def test_range_and_determinism(self):
        data = synth_generate(1, 300, 5)
        s1 = train_base_scorer(data.features, data.a, data.y)
        s2 = train_base_scorer(data.features, data.a, data.y)
        assert np.array_equal(s1.coef, s2.coef)
        sc = s1.score(data.features, data.a)
        assert sc.min() >= 0 and sc.max() <= 1

    def test_single_class(self):
        with pytest.raises(UsageError):
            train_base_scorer(np.zeros((5, 2)), np.zeros(5), np.ones(5))


class TestBenchmark:
    def test_single_repetition_quantile(self):
        spec = FairnessSpec("eoo", 0.16, 0.1, mc_samples=200)
        rows = run_benchmark(1, [spec], 1, seed=3, n=600)
        r = rows[0]
        if r.feasible:
            assert r.q95_abs_deoo == r.mean_abs_deoo
        assert r.repetitions == 1

    def test_order_invariance(self):
        specs = [FairnessSpec("eoo", 0.1, 0.1)]
        rng = np.random.default_rng(0)
        results = [
            RepetitionResult(i, ("ok",), (float(rng.random()),), (float(rng.random()),), (float(rng.random()),))
            for i in range(30)
        ] + [RepetitionResult(30, ("infeasible",), (None,), (None,), (None,))]
        a = aggregate(specs, results)
        b = aggregate(specs, results[::-1])
        assert a == b
        assert a[0].infeasible == 1 and a[0].feasible == 30

    def test_infeasible_counted(self):
        # tiny samples cannot meet the eo minimum
        spec = FairnessSpec("eo", 0.05, 0.05, mc_samples=100)
        rows = run_benchmark(1, [spec], 2, seed=0, n=100)
        assert rows[0].infeasible == 2
        assert rows[0].mean_abs_deoo is None
        assert "/" in format_table(rows)

    def test_scored_source(self):
        rng = np.random.default_rng(1)
        n = 1500
        y = rng.integers(0, 2, n)
        a = rng.integers(0, 2, n)
        s = np.clip(0.35 * y + 0.65 * rng.random(n), 0, 1)
        rows = run_benchmark(ScoredData(s, y, a), [FairnessSpec("pe", 0.15, 0.1, mc_samples=200)], 2, seed=1)
        assert rows[0].feasible == 2

    def test_workers_do_not_change_rows(self):
        specs = [FairnessSpec("eoo", 0.16, 0.1, mc_samples=200)]
        a = run_benchmark(1, specs, 3, seed=7, n=600)
        b = run_benchmark(1, specs, 3, seed=7, n=600, workers=2)
        assert a == b

    def test_bad_split(self):
        with pytest.raises(UsageError):
            run_benchmark(1, [FairnessSpec("eoo", 0.1, 0.1)], 1, split=(0.5, 0.5, 0.0))
        with pytest.raises(UsageError):
            run_benchmark(1, [FairnessSpec("eoo", 0.1, 0.1)], 0)
