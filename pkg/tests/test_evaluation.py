import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import resamplerec.evaluation as evaluation
from resamplerec.config import MultiplierGrid
from resamplerec.data import stratified_folds
from resamplerec.evaluation import (CellInfeasible, cv_quality, load_grid, pr_auc,
                                    quality_grid, save_grid)
from resamplerec.learners import DEFAULT_LEARNERS, LearnerSpec
from resamplerec.resampling import ResamplingSpec

from conftest import make_dataset
from oracles import pr_auc_step_curve

TREE = LearnerSpec("decision_tree", max_depth=3, min_leaf=2)


class TestPrAuc:
    def test_perfect_ranking(self):
        assert pr_auc(np.array([1, 0]), np.array([0.9, 0.1])) == 1.0

    def test_single_positive_at_rank_two(self):
        labels, scores = np.array([0, 1]), np.array([0.9, 0.1])
        expected = pr_auc_step_curve(labels, scores)
        assert expected == 0.5
        assert pr_auc(labels, scores) == expected

    def test_all_positive(self):
        assert pr_auc(np.ones(4, dtype=int), np.array([0.1, 0.9, 0.5, 0.5])) == 1.0

    def test_no_positives_rejected(self):
        with pytest.raises(ValueError, match="PR-AUC undefined"):
            pr_auc(np.zeros(3, dtype=int), np.array([0.1, 0.2, 0.3]))

    def test_matches_step_curve_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            n = int(rng.integers(2, 21))
            labels = np.zeros(n, dtype=int)
            labels[rng.integers(0, n)] = 1
            extra = rng.uniform(size=n) < 0.4
            labels = np.maximum(labels, extra.astype(int))
            scores = rng.choice([0.1, 0.25, 0.5, 0.8], size=n)  # force ties
            assert pr_auc(labels, scores) == pytest.approx(
                pr_auc_step_curve(labels, scores), abs=1e-12)

    @given(st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_monotone_transform_invariance(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 30))
        labels = (rng.uniform(size=n) < 0.5).astype(int)
        labels[rng.integers(0, n)] = 1
        scores = rng.normal(size=n)
        transformed = np.exp(3.0 * scores) + 1.0  # strictly monotone
        assert pr_auc(labels, scores) == pytest.approx(pr_auc(labels, transformed), abs=1e-12)

    def test_tie_permutation_invariance(self):
        rng = np.random.default_rng(5)
        labels = np.array([1, 0, 1, 0, 1, 0, 0, 1])
        scores = np.array([0.5, 0.5, 0.5, 0.2, 0.2, 0.8, 0.8, 0.8])
        base = pr_auc(labels, scores)
        for _ in range(10):
            perm = rng.permutation(8)
            assert pr_auc(labels[perm], scores[perm]) == pytest.approx(base, abs=1e-15)


class TestCvQuality:
    def test_deterministic(self, tiny_imbalanced):
        folds = stratified_folds(tiny_imbalanced, 5, seed=3)
        spec = ResamplingSpec("ros", 2.0)
        a = cv_quality(tiny_imbalanced, TREE, spec, folds, seed=11)
        b = cv_quality(tiny_imbalanced, TREE, spec, folds, seed=11)
        assert np.array_equal(a, b)

    def test_vector_length_is_k(self):
        s = make_dataset(120, 40, seed=2)
        folds = stratified_folds(s, 20, seed=1)
        scores = cv_quality(s, TREE, ResamplingSpec("none"), folds, seed=5)
        assert scores.shape == (20,)
        assert np.all((scores > 0.0) & (scores <= 1.0))

    def test_test_folds_never_resampled(self, tiny_imbalanced, monkeypatch):
        """The labels scored per fold must be the original fold labels."""
        folds = stratified_folds(tiny_imbalanced, 5, seed=3)
        seen_eval_counts = []
        seen_train_counts = []
        real_pr_auc = evaluation.pr_auc
        real_fit = evaluation.fit_arrays

        def spy_pr_auc(labels, scores):
            seen_eval_counts.append((int((labels == 0).sum()), int((labels == 1).sum())))
            return real_pr_auc(labels, scores)

        def spy_fit(spec, x, y, seed=0):
            seen_train_counts.append((int((y == 0).sum()), int((y == 1).sum())))
            return real_fit(spec, x, y, seed=seed)

        monkeypatch.setattr(evaluation, "pr_auc", spy_pr_auc)
        monkeypatch.setattr(evaluation, "fit_arrays", spy_fit)
        cv_quality(tiny_imbalanced, TREE, ResamplingSpec("ros", 2.0), folds, seed=7)
        for j in range(5):
            mask = folds.test_mask(j)
            original = (int((tiny_imbalanced.labels[mask] == 0).sum()),
                        int((tiny_imbalanced.labels[mask] == 1).sum()))
            assert seen_eval_counts[j] == original
        # training splits WERE resampled: minors doubled
        for c0, c1 in seen_train_counts:
            assert c1 == 2 * 16  # 16 original minors per training split, doubled

    def test_infeasible_raises_cell_signal(self):
        s = make_dataset(40, 20, seed=3)  # IR = 2
        folds = stratified_folds(s, 4, seed=1)
        with pytest.raises(CellInfeasible):
            cv_quality(s, TREE, ResamplingSpec("rus", 3.0), folds, seed=2)


class TestQualityGrid:
    def test_paper_grid_cell_count(self):
        grid = MultiplierGrid()  # 1.25..10.0 step 0.25
        assert len(grid.values()) == 36
        methods = ["ros", "rus", "smote1", "smote3", "smote5", "smote7"]
        # 6 methods x 36 multipliers + the no-resampling cell
        assert len(methods) * len(grid.values()) + 1 == 217

    def test_rus_cells_skipped_above_ir(self):
        s = make_dataset(40, 20, seed=4)  # IR = 2
        g = quality_grid(s, TREE, ["rus"], [1.5, 2.5], k=4, seed=9)
        assert ("rus", 1.5) in g.cells
        assert ("rus", 2.5) in g.skips
        assert "exceeds IR" in g.skips[("rus", 2.5)]

    def test_baseline_always_present(self):
        s = make_dataset(40, 20, seed=4)
        g = quality_grid(s, TREE, ["ros"], [2.0], k=4, seed=9)
        assert ("none", 1.0) in g.cells

    def test_baseline_independent_of_multiplier_list(self):
        s = make_dataset(60, 20, seed=5)
        a = quality_grid(s, TREE, ["ros"], [1.5], k=4, seed=9)
        b = quality_grid(s, TREE, ["ros", "rus"], [1.5, 2.0], k=4, seed=9)
        assert np.array_equal(a.baseline, b.baseline)

    def test_folds_shared_across_cells(self, monkeypatch):
        s = make_dataset(60, 20, seed=5)
        calls = []
        real = evaluation.stratified_folds

        def spy(ds, k, seed):
            calls.append(seed)
            return real(ds, k, seed)

        monkeypatch.setattr(evaluation, "stratified_folds", spy)
        quality_grid(s, TREE, ["ros", "rus"], [1.5, 2.0], k=4, seed=9)
        assert len(calls) == 1

    def test_parallel_matches_sequential(self):
        s = make_dataset(60, 20, seed=6)
        seq = quality_grid(s, TREE, ["ros", "smote3"], [1.5, 2.0], k=4, seed=3)
        par = quality_grid(s, TREE, ["ros", "smote3"], [1.5, 2.0], k=4, seed=3, workers=2)
        assert seq.cells.keys() == par.cells.keys()
        for key in seq.cells:
            assert np.array_equal(seq.cells[key], par.cells[key])

    def test_precomputed_cells_reused(self):
        s = make_dataset(60, 20, seed=6)
        full = quality_grid(s, TREE, ["ros"], [1.5, 2.0], k=4, seed=3)
        fake = dict(full.cells)
        fake[("ros", 1.5)] = np.zeros(4)  # a wrong value proves it is not recomputed
        resumed = quality_grid(s, TREE, ["ros"], [1.5, 2.0], k=4, seed=3, precomputed=fake)
        assert np.array_equal(resumed.cells[("ros", 1.5)], np.zeros(4))
        assert np.array_equal(resumed.cells[("ros", 2.0)], full.cells[("ros", 2.0)])

    def test_save_load_bit_exact(self, tmp_path):
        s = make_dataset(44, 22, seed=7)
        g = quality_grid(s, TREE, ["ros", "rus"], [1.5, 3.0], k=4, seed=13)
        save_grid(g, tmp_path / "g.csv")
        back = load_grid(tmp_path / "g.csv")
        assert back.dataset_id == g.dataset_id and back.k == g.k and back.seed == g.seed
        assert back.methods == g.methods and back.multipliers == g.multipliers
        assert back.cells.keys() == g.cells.keys()
        for key in g.cells:
            assert np.array_equal(back.cells[key], g.cells[key])
        assert back.skips == g.skips
