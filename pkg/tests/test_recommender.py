import numpy as np
import pytest

from resamplerec.data import MixtureConfig, generate_mixture, imbalance_ratio
from resamplerec.evaluation import quality_grid
from resamplerec.learners import LearnerSpec, constant_model, fit_count
from resamplerec.recommender import (PRESETS, MetaRecord, RecommenderModel,
                                     build_meta_dataset, load_recommender, recommend,
                                     recommender_to_dict, save_recommender, snap_to_grid,
                                     train, train_approach1, train_approach2)

from conftest import make_dataset

TREE = LearnerSpec("decision_tree", max_depth=3, min_leaf=2)
METHODS = ["ros", "rus", "smote3"]
MULTS = [1.5, 2.0, 2.5]


@pytest.fixture(scope="module")
def small_bank():
    cfg = MixtureConfig(dim_range=(3, 5), size_range=(70, 120),
                        minor_fraction_range=(0.1, 0.3), seed=77)
    datasets = [generate_mixture(cfg, i) for i in range(8)]
    grids = [quality_grid(s, TREE, METHODS, MULTS, k=5, seed=3) for s in datasets]
    return list(zip(datasets, grids))


@pytest.fixture(scope="module")
def meta_records(small_bank):
    return build_meta_dataset(small_bank, epsilon=0.75, alpha=0.05)


class TestBuildMetaDataset:
    def test_one_record_per_dataset(self, small_bank, meta_records):
        assert len(meta_records) == len(small_bank)
        assert [r.dataset_id for r in meta_records] == [s.id for s, _ in small_bank]

    def test_deterministic(self, small_bank, meta_records):
        again = build_meta_dataset(small_bank, epsilon=0.75, alpha=0.05)
        for a, b in zip(meta_records, again):
            assert np.array_equal(a.features.values, b.features.values)
            assert a.qv == b.qv
            assert a.targets == b.targets

    def test_inconsistent_grids_rejected(self, small_bank):
        s0, g0 = small_bank[0]
        bad = quality_grid(s0, TREE, ["ros"], [2.0], k=5, seed=3)
        with pytest.raises(ValueError, match="inconsistent"):
            build_meta_dataset([small_bank[1], (s0, bad)], 0.75, 0.05)

    def test_targets_consistent_with_qv(self, meta_records):
        for rec in meta_records:
            for key, cv in rec.qv.cells.items():
                assert rec.targets.y_rm[key] == int(cv.q_pval < 0.05)


class TestTrainApproach1:
    def test_one_classifier_per_present_cell(self, meta_records):
        model = train_approach1(meta_records, PRESETS["rs1-dtree"])
        present = set()
        for rec in meta_records:
            present.update(rec.qv.cells.keys())
        assert set(model.a1_models.keys()) == present

    def test_single_class_targets_get_laplace_constant(self):
        records = []
        rng = np.random.default_rng(0)
        for i in range(4):
            base = rng.uniform(0.4, 0.6, size=6)
            from resamplerec.evaluation import QualityGrid
            cells = {("none", 1.0): base, ("ros", 2.0): base + 0.2}  # p-value 0 always
            g = QualityGrid(dataset_id=f"d{i}", learner_id="synthetic", k=6, seed=1,
                            methods=["ros"], multipliers=[2.0], cells=cells)
            records.append((make_dataset(30, 10, seed=i, dataset_id=f"d{i}"), g))
        meta = build_meta_dataset(records, 0.75, 0.05)
        model = train_approach1(meta, PRESETS["rs1-dtree"])
        mdl = model.a1_models[("ros", 2.0)]
        assert mdl.constant_score == pytest.approx((4 + 1) / (4 + 2))

    def test_wrong_approach_preset_rejected(self, meta_records):
        with pytest.raises(ValueError, match="not an approach-1"):
            train_approach1(meta_records, PRESETS["rs2-dtree"])

    def test_empty_meta_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            train_approach1([], PRESETS["rs1-dtree"])


class TestTrainApproach2:
    def test_one_pair_per_method(self, meta_records):
        model = train_approach2(meta_records, PRESETS["rs2-dtree"])
        methods = set(meta_records[0].qv.methods)
        assert set(model.a2_classifiers.keys()) == methods
        assert set(model.a2_regressors.keys()) == methods

    def test_no_positive_records_gives_midpoint_regressor(self):
        records = []
        rng = np.random.default_rng(1)
        for i in range(4):
            base = rng.uniform(0.4, 0.6, size=6)
            from resamplerec.evaluation import QualityGrid
            cells = {("none", 1.0): base, ("ros", 1.5): base - 0.2, ("ros", 4.0): base - 0.1}
            g = QualityGrid(dataset_id=f"d{i}", learner_id="synthetic", k=6, seed=1,
                            methods=["ros"], multipliers=[1.5, 4.0], cells=cells)
            records.append((make_dataset(30, 10, seed=i, dataset_id=f"d{i}"), g))
        meta = build_meta_dataset(records, 0.75, 0.05)
        model = train_approach2(meta, PRESETS["rs2-dtree"])
        assert model.a2_regressors["ros"].constant_score == pytest.approx((1.5 + 4.0) / 2)


class TestSnap:
    def test_nearest_ties_down(self):
        grid = [1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
        assert snap_to_grid(3.13, grid) == 3.0
        assert snap_to_grid(3.30, grid) == 3.5
        assert snap_to_grid(2.75, grid) == 2.5  # exact midpoint snaps down
        assert snap_to_grid(0.2, grid) == 1.5   # clipped to range
        assert snap_to_grid(9.9, grid) == 4.0


def constant_a1_model(scores: dict, methods=("ros", "rus"), multipliers=(1.5, 2.0)) -> RecommenderModel:
    spec = LearnerSpec("adaboost_clf")
    model = RecommenderModel(
        approach="a1", preset_name="rs1-dtree", alpha=0.05, epsilon=0.75,
        feature_names=["reversed_ir", "center_distance"], methods=list(methods),
        multipliers=[float(m) for m in multipliers], classifier_spec=spec)
    for key, p in scores.items():
        model.a1_models[key] = constant_model(spec, 2, p)
    return model


class TestRecommend:
    def test_all_negative_returns_no_resampling(self):
        model = constant_a1_model({("ros", 1.5): 0.2, ("rus", 2.0): 0.4})
        s = make_dataset(60, 20)
        rec = recommend(model, s)
        assert rec.spec.method == "none" and rec.spec.multiplier == 1.0

    def test_single_positive_cell_wins(self):
        model = constant_a1_model({("ros", 1.5): 0.2, ("rus", 2.0): 0.8})
        rec = recommend(model, make_dataset(60, 20))
        assert (rec.spec.method, rec.spec.multiplier) == ("rus", 2.0)

    def test_argmax_over_positive_cells(self):
        scores = {("ros", 1.5): 0.7, ("ros", 2.0): 0.9, ("rus", 1.5): 0.85}
        model = constant_a1_model(scores)
        rec = recommend(model, make_dataset(60, 20))
        assert (rec.spec.method, rec.spec.multiplier) == ("ros", 2.0)
        positives = {k: p for k, p in rec.details["p_hat"].items() if p >= 0.5}
        assert max(positives.values()) == 0.9

    def test_tie_broken_by_method_order_then_multiplier(self):
        scores = {("rus", 2.0): 0.8, ("ros", 2.0): 0.8, ("ros", 1.5): 0.8}
        model = constant_a1_model(scores)
        rec = recommend(model, make_dataset(60, 20))
        assert (rec.spec.method, rec.spec.multiplier) == ("ros", 1.5)

    def test_infeasible_winner_falls_through(self):
        # rus@2.0 has the top score but IR(S) = 1.5 < 2.0, so ros wins
        scores = {("rus", 2.0): 0.9, ("ros", 1.5): 0.6}
        model = constant_a1_model(scores)
        s = make_dataset(30, 20)
        assert imbalance_ratio(s) == 1.5
        rec = recommend(model, s)
        assert (rec.spec.method, rec.spec.multiplier) == ("ros", 1.5)

    def test_all_infeasible_falls_to_none(self):
        scores = {("rus", 2.0): 0.9}
        model = constant_a1_model(scores)
        rec = recommend(model, make_dataset(30, 20))
        assert rec.spec.method == "none"

    def test_recommend_is_pure_and_fits_nothing(self, meta_records, small_bank):
        model = train(meta_records, PRESETS["rs1-dtree"])
        s = small_bank[0][0]
        before = fit_count()
        a = recommend(model, s)
        b = recommend(model, s)
        assert fit_count() == before  # zero base-learner fits during recommend
        assert a.spec == b.spec

    def test_a2_decision_rule(self, meta_records, small_bank):
        model = train(meta_records, PRESETS["rs2-dtree"])
        s = small_bank[0][0]
        rec = recommend(model, s)
        if rec.spec.method != "none":
            assert rec.spec.multiplier in model.multipliers
            positives = {r: p for r, p in rec.details["p_hat"].items() if p >= 0.5}
            assert rec.details["p_hat"][rec.spec.method] == max(positives.values())
        else:
            assert rec.spec.multiplier == 1.0


class TestSerialization:
    def test_round_trip_a1(self, meta_records, small_bank, tmp_path):
        model = train(meta_records, PRESETS["rs1-dtree"])
        save_recommender(model, tmp_path / "a1.json")
        back = load_recommender(tmp_path / "a1.json")
        for s, _ in small_bank:
            assert recommend(model, s).spec == recommend(back, s).spec

    def test_round_trip_a2(self, meta_records, small_bank, tmp_path):
        model = train(meta_records, PRESETS["rs2-dtree"])
        save_recommender(model, tmp_path / "a2.json")
        back = load_recommender(tmp_path / "a2.json")
        for s, _ in small_bank:
            assert recommend(model, s).spec == recommend(back, s).spec

    def test_format_check(self, meta_records):
        doc = recommender_to_dict(train(meta_records, PRESETS["rs1-dtree"]))
        doc["format"] = "other"
        from resamplerec.recommender import recommender_from_dict
        with pytest.raises(ValueError, match="not a recommender"):
            recommender_from_dict(doc)


class TestPresets:
    def test_paper_presets_exist(self):
        assert PRESETS["rs1-dtree"].alpha == 0.05
        assert PRESETS["rs1-logreg"].alpha == 0.3
        assert len(PRESETS["rs1-logreg"].feature_names) == 8
        assert PRESETS["rs2-dtree"].feature_names == ("reversed_ir", "center_distance")
        for name, preset in PRESETS.items():
            if preset.approach == "a2":
                assert preset.regressor_spec is not None

    def test_meta_model_is_adaboost_10(self):
        clf = PRESETS["rs1-dtree"].classifier_spec
        assert clf.kind == "adaboost_clf" and clf.n_estimators == 10
