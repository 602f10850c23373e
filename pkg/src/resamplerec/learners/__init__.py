"""Base classifiers and meta-level models behind one fit/predict surface.

Kinds: decision_tree, knn, logreg_l1, adaboost_clf, adaboost_reg. All
classifiers expose a score in [0, 1] that is monotone in the confidence for
class 1; labels threshold the score at 0.5 (boundary inclusive). Every fit
bumps a module-level counter so tests can assert that recommendation never
trains a base learner.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..data import Dataset
from .boost import (BoostStage, boosted_classifier_scores, boosted_regressor_predict,
                    fit_boosted_classifier, fit_boosted_regressor)
from .instrument import count_fit as _count_fit
from .instrument import fit_count
from .knn import knn_scores
from .logreg import fit_logreg_l1
from .tree import TreeNode, build_classification_tree, build_regression_tree, tree_predict

KINDS = ("decision_tree", "knn", "logreg_l1", "adaboost_clf", "adaboost_reg")


@dataclass(frozen=True)
class LearnerSpec:
    kind: str
    max_depth: int | None = None
    min_leaf: int = 5
    k: int = 5
    l1_strength: float = 1.0
    max_iter: int = 500
    tol: float = 1e-6
    n_estimators: int = 10
    learning_rate: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown learner kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if self.l1_strength < 0:
            raise ValueError("l1_strength must be >= 0")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")

    def token(self) -> str:
        if self.kind == "decision_tree":
            return f"decision_tree(depth={self.max_depth},min_leaf={self.min_leaf})"
        if self.kind == "knn":
            return f"knn(k={self.k})"
        if self.kind == "logreg_l1":
            return f"logreg_l1(l1={self.l1_strength:g})"
        return f"{self.kind}(n={self.n_estimators},depth={self.max_depth},min_leaf={self.min_leaf})"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "max_depth": self.max_depth, "min_leaf": self.min_leaf,
            "k": self.k, "l1_strength": self.l1_strength, "max_iter": self.max_iter,
            "tol": self.tol, "n_estimators": self.n_estimators,
            "learning_rate": self.learning_rate,
        }

    @staticmethod
    def from_dict(d: dict) -> "LearnerSpec":
        return LearnerSpec(**d)


# documented defaults for the paper-level experiments
DEFAULT_ADABOOST_DEPTH = 3

DEFAULT_LEARNERS = {
    "decision_tree": LearnerSpec("decision_tree", max_depth=None, min_leaf=5),
    "knn": LearnerSpec("knn", k=5),
    "logreg_l1": LearnerSpec("logreg_l1", l1_strength=1.0, max_iter=500, tol=1e-6),
    "adaboost_clf": LearnerSpec("adaboost_clf", n_estimators=10,
                                max_depth=DEFAULT_ADABOOST_DEPTH, min_leaf=1),
    "adaboost_reg": LearnerSpec("adaboost_reg", n_estimators=10,
                                max_depth=DEFAULT_ADABOOST_DEPTH, min_leaf=1),
}


@dataclass
class Model:
    spec: LearnerSpec
    n_features: int
    tree: TreeNode | None = None
    train_x: np.ndarray | None = None
    train_y: np.ndarray | None = None
    coef: np.ndarray | None = None
    intercept: float = 0.0
    stages: list[BoostStage] = field(default_factory=list)
    constant_score: float | None = None

    @property
    def is_regressor(self) -> bool:
        return self.spec.kind == "adaboost_reg"


def fit(spec: LearnerSpec, s: Dataset, seed: int = 0) -> Model:
    """Fit a classifier on a Dataset. Deterministic given (spec, data)."""
    return fit_arrays(spec, s.features, s.labels, seed=seed)


def fit_arrays(spec: LearnerSpec, x: np.ndarray, y: np.ndarray, seed: int = 0) -> Model:
    """Fit on raw arrays (classification targets {0,1}, regression targets real)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ValueError("feature matrix and targets do not align")
    if x.shape[0] == 0:
        raise ValueError("empty dataset")
    model = Model(spec=spec, n_features=x.shape[1])
    if spec.kind == "decision_tree":
        model.tree = build_classification_tree(x, y.astype(np.int64),
                                               max_depth=spec.max_depth, min_leaf=spec.min_leaf)
    elif spec.kind == "knn":
        _count_fit()
        model.train_x = x.copy()
        model.train_y = y.astype(np.float64)
    elif spec.kind == "logreg_l1":
        model.coef, model.intercept = fit_logreg_l1(
            x, y.astype(np.float64), l1_strength=spec.l1_strength,
            max_iter=spec.max_iter, tol=spec.tol)
    elif spec.kind == "adaboost_clf":
        model.stages = fit_boosted_classifier(
            x, y.astype(np.int64), n_estimators=spec.n_estimators,
            max_depth=spec.max_depth, min_leaf=spec.min_leaf,
            learning_rate=spec.learning_rate)
    else:
        model.stages = fit_boosted_regressor(
            x, y.astype(np.float64), n_estimators=spec.n_estimators,
            max_depth=spec.max_depth, min_leaf=spec.min_leaf,
            learning_rate=spec.learning_rate)
    return model


def constant_model(spec: LearnerSpec, n_features: int, score: float) -> Model:
    """Classifier that returns a fixed score (degenerate single-class training)."""
    return Model(spec=spec, n_features=n_features, constant_score=float(score))


def predict_scores(model: Model, x: np.ndarray) -> np.ndarray:
    """Class-1 scores in [0,1] (or real predictions for the regressor)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} features, got {x.shape[1]}")
    if model.constant_score is not None:
        return np.full(x.shape[0], model.constant_score)
    kind = model.spec.kind
    if kind == "decision_tree":
        return tree_predict(model.tree, x)
    if kind == "knn":
        return knn_scores(model.train_x, model.train_y, x, model.spec.k)
    if kind == "logreg_l1":
        z = x @ model.coef + model.intercept
        return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
    if kind == "adaboost_clf":
        return boosted_classifier_scores(model.stages, x)
    return boosted_regressor_predict(model.stages, x)


def predict_score(model: Model, x: np.ndarray) -> float:
    return float(predict_scores(model, np.atleast_2d(x))[0])


def predict_labels(model: Model, x: np.ndarray) -> np.ndarray:
    if model.is_regressor:
        raise ValueError("regressor has no class labels")
    return (predict_scores(model, x) >= 0.5).astype(np.int64)


def predict_label(model: Model, x: np.ndarray) -> int:
    return int(predict_labels(model, np.atleast_2d(x))[0])


def fit_adaboost_classifier(base: LearnerSpec, n_estimators: int, s: Dataset, seed: int = 0) -> Model:
    """Boost the given tree spec; convenience wrapper over fit()."""
    spec = LearnerSpec("adaboost_clf", n_estimators=n_estimators,
                       max_depth=base.max_depth, min_leaf=base.min_leaf)
    return fit(spec, s, seed=seed)


def fit_adaboost_regressor(base: LearnerSpec, n_estimators: int,
                           samples: list[tuple[np.ndarray, float]] | tuple[np.ndarray, np.ndarray],
                           seed: int = 0) -> Model:
    if isinstance(samples, tuple):
        x, y = samples
    else:
        if not samples:
            raise ValueError("empty input")
        x = np.asarray([f for f, _ in samples], dtype=np.float64)
        y = np.asarray([t for _, t in samples], dtype=np.float64)
    spec = LearnerSpec("adaboost_reg", n_estimators=n_estimators,
                       max_depth=base.max_depth, min_leaf=base.min_leaf)
    return fit_arrays(spec, x, y, seed=seed)


MODEL_FORMAT = "resamplerec-model"
MODEL_VERSION = 1


def model_to_dict(model: Model) -> dict:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "spec": model.spec.to_dict(),
        "n_features": model.n_features,
    }
    if model.constant_score is not None:
        doc["constant_score"] = model.constant_score
        return doc
    kind = model.spec.kind
    if kind == "decision_tree":
        doc["tree"] = model.tree.to_dict()
    elif kind == "knn":
        doc["train_x"] = model.train_x.tolist()
        doc["train_y"] = model.train_y.tolist()
    elif kind == "logreg_l1":
        doc["coef"] = model.coef.tolist()
        doc["intercept"] = model.intercept
    else:
        doc["stages"] = [{"weight": st.weight, "tree": st.tree.to_dict()} for st in model.stages]
    return doc


def model_from_dict(doc: dict) -> Model:
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError("not a model document")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')}")
    spec = LearnerSpec.from_dict(doc["spec"])
    model = Model(spec=spec, n_features=int(doc["n_features"]))
    if "constant_score" in doc:
        model.constant_score = float(doc["constant_score"])
        return model
    kind = spec.kind
    if kind == "decision_tree":
        model.tree = TreeNode.from_dict(doc["tree"])
    elif kind == "knn":
        model.train_x = np.asarray(doc["train_x"], dtype=np.float64)
        model.train_y = np.asarray(doc["train_y"], dtype=np.float64)
    elif kind == "logreg_l1":
        model.coef = np.asarray(doc["coef"], dtype=np.float64)
        model.intercept = float(doc["intercept"])
    else:
        model.stages = [BoostStage(TreeNode.from_dict(st["tree"]), float(st["weight"]))
                        for st in doc["stages"]]
    return model


def save_model(model: Model, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), sort_keys=True), encoding="utf-8")


def load_model(path: str | Path) -> Model:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
