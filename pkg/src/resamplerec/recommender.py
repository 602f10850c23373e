"""Meta-learning recommenders.

Approach 1 trains one binary meta-classifier per (method, multiplier) cell
on the "beats the baseline at level alpha" indicator. Approach 2 trains one
classifier per method on the does-any-multiplier-help indicator plus one
regressor per method predicting the best multiplier. Both share the decision
rule: take the positive prediction with the highest probability, fall back
to no-resampling when nothing is predicted to help.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Dataset
from .evaluation import QualityGrid
from .learners import (LearnerSpec, Model, constant_model, fit_arrays, model_from_dict,
                       model_to_dict, predict_score)
from .metafeatures import MetaFeatures, compute_meta_features
from .qualityvars import (MetaTargets, QualityVariables, binarize_targets,
                          compute_quality_variables)
from .resampling import ResamplingSpec, feasible


@dataclass(frozen=True)
class MetaRecord:
    dataset_id: str
    features: MetaFeatures
    qv: QualityVariables
    targets: MetaTargets


def build_meta_dataset(records: list[tuple[Dataset, QualityGrid]],
                       epsilon: float, alpha: float) -> list[MetaRecord]:
    """One MetaRecord per (dataset, grid) pair; grids must share R, M and k."""
    if not records:
        return []
    ref = records[0][1]
    out = []
    for dataset, grid in records:
        if grid.dataset_id != dataset.id:
            raise ValueError(f"grid {grid.dataset_id} does not match dataset {dataset.id}")
        if (grid.methods, [float(m) for m in grid.multipliers], grid.k) != \
                (ref.methods, [float(m) for m in ref.multipliers], ref.k):
            raise ValueError("inconsistent grid shapes across records")
        qv = compute_quality_variables(grid, epsilon)
        out.append(MetaRecord(dataset_id=dataset.id,
                              features=compute_meta_features(dataset),
                              qv=qv,
                              targets=binarize_targets(qv, alpha)))
    return out


@dataclass(frozen=True)
class RecommenderPreset:
    """Named meta-model configuration: model specs, feature subset, alpha."""

    name: str
    approach: str  # "a1" or "a2"
    alpha: float
    feature_names: tuple[str, ...]
    classifier_spec: LearnerSpec
    regressor_spec: LearnerSpec | None = None


_ADA_CLF = LearnerSpec("adaboost_clf", n_estimators=10, max_depth=3, min_leaf=5)
_ADA_REG = LearnerSpec("adaboost_reg", n_estimators=10, max_depth=3, min_leaf=5)

_RS1_FEATURES = ("reversed_ir", "center_distance", "n_objects",
                 "min_abs_cov_eig_major", "max_kurt_pval_minor")
_RS2_FEATURES = ("reversed_ir", "center_distance")
_RS1_LOGREG_FEATURES = ("reversed_ir", "center_distance", "n_objects",
                        "min_abs_cov_eig_major",
                        "min_kurt_pval_minor", "max_kurt_pval_minor",
                        "min_skew_pval_minor", "max_skew_pval_minor")

PRESETS: dict[str, RecommenderPreset] = {
    "rs1-dtree": RecommenderPreset("rs1-dtree", "a1", 0.05, _RS1_FEATURES, _ADA_CLF),
    "rs2-dtree": RecommenderPreset("rs2-dtree", "a2", 0.05, _RS2_FEATURES, _ADA_CLF, _ADA_REG),
    "rs1-knn": RecommenderPreset("rs1-knn", "a1", 0.05, _RS1_FEATURES, _ADA_CLF),
    "rs2-knn": RecommenderPreset("rs2-knn", "a2", 0.05, _RS2_FEATURES, _ADA_CLF, _ADA_REG),
    "rs1-logreg": RecommenderPreset("rs1-logreg", "a1", 0.3, _RS1_LOGREG_FEATURES,
                                    LearnerSpec("logreg_l1")),
    "rs2-logreg": RecommenderPreset("rs2-logreg", "a2", 0.05, _RS2_FEATURES, _ADA_CLF, _ADA_REG),
}

DEFAULT_PRESETS = {
    ("a1", "decision_tree"): "rs1-dtree",
    ("a2", "decision_tree"): "rs2-dtree",
    ("a1", "knn"): "rs1-knn",
    ("a2", "knn"): "rs2-knn",
    ("a1", "logreg_l1"): "rs1-logreg",
    ("a2", "logreg_l1"): "rs2-logreg",
}


@dataclass
class RecommenderModel:
    approach: str
    preset_name: str
    alpha: float
    epsilon: float
    feature_names: list[str]
    methods: list[str]
    multipliers: list[float]
    classifier_spec: LearnerSpec
    regressor_spec: LearnerSpec | None = None
    a1_models: dict[tuple[str, float], Model] = field(default_factory=dict)
    a2_classifiers: dict[str, Model] = field(default_factory=dict)
    a2_regressors: dict[str, Model] = field(default_factory=dict)
    trained_on_ids: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class Recommendation:
    spec: ResamplingSpec
    provenance: str
    details: dict = field(default_factory=dict)


def _fit_binary_meta(spec: LearnerSpec, x: np.ndarray, y: np.ndarray) -> Model:
    """Fit the meta-classifier; single-class targets become a constant model
    whose score is the Laplace-smoothed class prior."""
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == y.shape[0]:
        return constant_model(spec, x.shape[1], (n_pos + 1.0) / (y.shape[0] + 2.0))
    return fit_arrays(spec, x, y)


def _record_matrix(records: list[MetaRecord], feature_names: list[str]) -> np.ndarray:
    return np.array([rec.features.select(feature_names) for rec in records])


def train_approach1(meta: list[MetaRecord], preset: RecommenderPreset,
                    use_windowed_pval_for_targets: bool = False) -> RecommenderModel:
    if not meta:
        raise ValueError("empty meta-dataset")
    if preset.approach != "a1":
        raise ValueError(f"preset {preset.name} is not an approach-1 preset")
    feature_names = list(preset.feature_names)
    methods = list(meta[0].qv.methods)
    multipliers = [float(m) for m in meta[0].qv.multipliers]
    model = RecommenderModel(
        approach="a1", preset_name=preset.name, alpha=preset.alpha,
        epsilon=meta[0].qv.epsilon, feature_names=feature_names, methods=methods,
        multipliers=multipliers, classifier_spec=preset.classifier_spec,
        trained_on_ids=[rec.dataset_id for rec in meta])
    targets = [binarize_targets(rec.qv, preset.alpha, use_windowed_pval_for_targets)
               for rec in meta]
    for method in methods:
        for m in multipliers:
            key = (method, m)
            rows = [i for i, rec in enumerate(meta) if key in rec.qv.cells]
            if not rows:
                continue  # cell skipped everywhere: no meta-model for it
            x = _record_matrix([meta[i] for i in rows], feature_names)
            y = np.array([targets[i].y_rm[key] for i in rows], dtype=np.int64)
            model.a1_models[key] = _fit_binary_meta(preset.classifier_spec, x, y)
    return model


def train_approach2(meta: list[MetaRecord], preset: RecommenderPreset,
                    use_windowed_pval_for_targets: bool = False) -> RecommenderModel:
    if not meta:
        raise ValueError("empty meta-dataset")
    if preset.approach != "a2":
        raise ValueError(f"preset {preset.name} is not an approach-2 preset")
    feature_names = list(preset.feature_names)
    methods = list(meta[0].qv.methods)
    multipliers = [float(m) for m in meta[0].qv.multipliers]
    model = RecommenderModel(
        approach="a2", preset_name=preset.name, alpha=preset.alpha,
        epsilon=meta[0].qv.epsilon, feature_names=feature_names, methods=methods,
        multipliers=multipliers, classifier_spec=preset.classifier_spec,
        regressor_spec=preset.regressor_spec,
        trained_on_ids=[rec.dataset_id for rec in meta])
    targets = [binarize_targets(rec.qv, preset.alpha, use_windowed_pval_for_targets)
               for rec in meta]
    midpoint = (min(multipliers) + max(multipliers)) / 2.0
    for method in methods:
        rows = [i for i, rec in enumerate(meta) if method in rec.qv.per_method]
        if not rows:
            continue
        x = _record_matrix([meta[i] for i in rows], feature_names)
        y = np.array([targets[i].y_r[method] for i in rows], dtype=np.int64)
        model.a2_classifiers[method] = _fit_binary_meta(preset.classifier_spec, x, y)
        # the multiplier regression is meaningful only where resampling helped
        pos = [i for i in rows if targets[i].y_r[method] == 1]
        if pos:
            xr = _record_matrix([meta[i] for i in pos], feature_names)
            zr = np.array([targets[i].z_r[method] for i in pos], dtype=np.float64)
            model.a2_regressors[method] = fit_arrays(preset.regressor_spec, xr, zr)
        else:
            model.a2_regressors[method] = constant_model(preset.regressor_spec,
                                                         len(feature_names), midpoint)
    return model


def train(meta: list[MetaRecord], preset: RecommenderPreset, **kwargs) -> RecommenderModel:
    if preset.approach == "a1":
        return train_approach1(meta, preset, **kwargs)
    return train_approach2(meta, preset, **kwargs)


def snap_to_grid(z: float, multipliers: list[float]) -> float:
    """Clip to the grid range, then snap to the nearest grid value (ties down)."""
    ms = sorted(float(m) for m in multipliers)
    z = min(max(z, ms[0]), ms[-1])
    return min(ms, key=lambda m: (abs(m - z), m))


def _spec_feasible(method: str, m: float, s: Dataset) -> bool:
    return feasible(ResamplingSpec(method, m), s.n_major, s.n_minor) is None


def recommend(model: RecommenderModel, s: Dataset) -> Recommendation:
    """Meta-features in, (method, multiplier) out; never fits a base learner.

    Candidates predicted to beat the baseline are ranked by probability
    (ties: method order, then smaller multiplier); infeasible winners fall
    through to the next candidate and finally to no-resampling.
    """
    f = compute_meta_features(s)
    x = f.select(model.feature_names)[None, :]
    method_order = {r: i for i, r in enumerate(model.methods)}
    if model.approach == "a1":
        probs = {key: predict_score(mdl, x) for key, mdl in model.a1_models.items()}
        candidates = [(key, p) for key, p in probs.items() if p >= 0.5]
        candidates.sort(key=lambda item: (-item[1], method_order[item[0][0]], item[0][1]))
        details = {"approach": "a1",
                   "p_hat": {f"{k[0]}@{k[1]:g}": p for k, p in sorted(probs.items())}}
        for (method, m), _ in candidates:
            if _spec_feasible(method, m, s):
                return Recommendation(ResamplingSpec(method, m), "a1", details)
        return Recommendation(ResamplingSpec("none"), "a1", details)

    probs_r = {r: predict_score(mdl, x) for r, mdl in model.a2_classifiers.items()}
    z_hat = {r: predict_score(model.a2_regressors[r], x) for r in model.a2_classifiers}
    details = {"approach": "a2",
               "p_hat": {r: p for r, p in sorted(probs_r.items())},
               "z_hat": {r: z for r, z in sorted(z_hat.items())}}
    candidates = [(r, p) for r, p in probs_r.items() if p >= 0.5]
    candidates.sort(key=lambda item: (-item[1], method_order[item[0]]))
    for r, _ in candidates:
        m = snap_to_grid(z_hat[r], model.multipliers)
        if _spec_feasible(r, m, s):
            return Recommendation(ResamplingSpec(r, m), "a2", details)
    return Recommendation(ResamplingSpec("none"), "a2", details)


RECOMMENDER_FORMAT = "resamplerec-recommender"
RECOMMENDER_VERSION = 1


def recommender_to_dict(model: RecommenderModel) -> dict:
    doc = {
        "format": RECOMMENDER_FORMAT,
        "version": RECOMMENDER_VERSION,
        "approach": model.approach,
        "preset": model.preset_name,
        "alpha": model.alpha,
        "epsilon": model.epsilon,
        "features": model.feature_names,
        "methods": model.methods,
        "multipliers": [repr(m) for m in model.multipliers],
        "classifier_spec": model.classifier_spec.to_dict(),
        "regressor_spec": model.regressor_spec.to_dict() if model.regressor_spec else None,
        "trained_on": model.trained_on_ids,
    }
    if model.approach == "a1":
        doc["models"] = {f"{k[0]}@{repr(k[1])}": model_to_dict(m)
                         for k, m in sorted(model.a1_models.items())}
    else:
        doc["models"] = {r: {"classifier": model_to_dict(model.a2_classifiers[r]),
                             "regressor": model_to_dict(model.a2_regressors[r])}
                         for r in sorted(model.a2_classifiers)}
    return doc


def recommender_from_dict(doc: dict) -> RecommenderModel:
    if doc.get("format") != RECOMMENDER_FORMAT:
        raise ValueError("not a recommender document")
    if doc.get("version") != RECOMMENDER_VERSION:
        raise ValueError(f"unsupported recommender version {doc.get('version')}")
    model = RecommenderModel(
        approach=doc["approach"], preset_name=doc["preset"], alpha=float(doc["alpha"]),
        epsilon=float(doc["epsilon"]), feature_names=list(doc["features"]),
        methods=list(doc["methods"]), multipliers=[float(m) for m in doc["multipliers"]],
        classifier_spec=LearnerSpec.from_dict(doc["classifier_spec"]),
        regressor_spec=LearnerSpec.from_dict(doc["regressor_spec"])
        if doc.get("regressor_spec") else None,
        trained_on_ids=list(doc["trained_on"]))
    if model.approach == "a1":
        for token, mdoc in doc["models"].items():
            method, m = token.rsplit("@", 1)
            model.a1_models[(method, float(m))] = model_from_dict(mdoc)
    else:
        for r, pair in doc["models"].items():
            model.a2_classifiers[r] = model_from_dict(pair["classifier"])
            model.a2_regressors[r] = model_from_dict(pair["regressor"])
    return model


def save_recommender(model: RecommenderModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(recommender_to_dict(model), sort_keys=True),
                          encoding="utf-8")


def load_recommender(path: str | Path) -> RecommenderModel:
    return recommender_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
