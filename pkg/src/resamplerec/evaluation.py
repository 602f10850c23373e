"""PR-AUC scoring and the cross-validated quality grid.

The protocol rule that everything downstream depends on: resampling is
applied to the training split only, never to the held-out fold. All cells
of one grid share a single fold assignment so per-fold scores are paired
across cells.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Dataset, FoldAssignment, stratified_folds
from .learners import LearnerSpec, fit_arrays, predict_scores
from .resampling import ResamplingSpec, feasible, resample
from .rng import derive_seed

BASELINE_KEY = ("none", 1.0)


class CellInfeasible(Exception):
    """Raised when a resampling spec cannot be applied to some training split."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def pr_auc(labels: np.ndarray, scores: np.ndarray) -> float:
    """Average precision with pooled tie groups.

    Rows are ranked by score descending; precision is computed at the end of
    each group of tied scores and assigned to every positive in the group,
    which makes the value invariant to permutations within ties.
    """
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=np.float64)
    if labels.shape != scores.shape or labels.ndim != 1:
        raise ValueError("labels and scores must be equal-length vectors")
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise ValueError("PR-AUC undefined: no positive labels")
    order = np.argsort(-scores, kind="stable")
    ys = labels[order]
    ss = scores[order]
    group_end = np.ones(ss.shape[0], dtype=bool)
    group_end[:-1] = ss[:-1] != ss[1:]
    ends = np.flatnonzero(group_end)
    cum_pos = np.cumsum(ys)[ends]
    precision = cum_pos / (ends + 1.0)
    pos_per_group = np.diff(np.concatenate([[0], cum_pos]))
    return float((precision * pos_per_group).sum() / n_pos)


def _check_feasible_on_splits(s: Dataset, spec: ResamplingSpec, folds: FoldAssignment) -> None:
    for j in range(folds.k):
        test = folds.test_mask(j)
        y_train = s.labels[~test]
        reason = feasible(spec, int((y_train == 0).sum()), int((y_train == 1).sum()))
        if reason is not None:
            raise CellInfeasible(f"fold {j}: {reason}")


def cv_quality(s: Dataset, learner: LearnerSpec, spec: ResamplingSpec,
               folds: FoldAssignment, seed: int) -> np.ndarray:
    """One PR-AUC per fold: resample the training split, fit, score the held-out fold.

    Raises CellInfeasible when the spec cannot be applied to every training
    split; callers building grids record that as a skipped cell.
    """
    _check_feasible_on_splits(s, spec, folds)
    scores = np.empty(folds.k)
    for j in range(folds.k):
        test = folds.test_mask(j)
        fold_seed = derive_seed(seed, "fold", j)
        train = Dataset(id=f"{s.id}#train{j}", features=s.features[~test], labels=s.labels[~test])
        resampled = resample(train, spec, fold_seed)
        model = fit_arrays(learner, resampled.features, resampled.labels, seed=fold_seed)
        scores[j] = pr_auc(s.labels[test], predict_scores(model, s.features[test]))
    return scores


@dataclass
class QualityGrid:
    """Per-(method, multiplier) fold-score vectors for one dataset and learner."""

    dataset_id: str
    learner_id: str
    k: int
    seed: int
    methods: list[str]
    multipliers: list[float]
    cells: dict[tuple[str, float], np.ndarray] = field(default_factory=dict)
    skips: dict[tuple[str, float], str] = field(default_factory=dict)

    def __post_init__(self):
        if BASELINE_KEY not in self.cells and self.cells:
            raise ValueError("grid must contain the no-resampling cell")

    @property
    def baseline(self) -> np.ndarray:
        return self.cells[BASELINE_KEY]

    def cell_keys(self) -> list[tuple[str, float]]:
        """Canonical cell order: baseline first, then methods x multipliers."""
        keys = [BASELINE_KEY]
        for method in self.methods:
            for m in self.multipliers:
                keys.append((method, float(m)))
        return keys


def cell_seed(master_seed: int, dataset_id: str, method: str, mult_index: int) -> int:
    return derive_seed(master_seed, dataset_id, method, mult_index)


def _evaluate_cell(s, learner, folds, master_seed, method, multiplier, mult_index):
    spec = ResamplingSpec(method, multiplier)
    seed = cell_seed(master_seed, s.id, method, mult_index)
    try:
        return cv_quality(s, learner, spec, folds, seed)
    except CellInfeasible as exc:
        return exc.reason


_WORKER_CTX: dict = {}


def _init_grid_worker(s, learner, folds, master_seed):
    _WORKER_CTX["args"] = (s, learner, folds, master_seed)


def _grid_cell_task(task):
    method, multiplier, mult_index = task
    s, learner, folds, master_seed = _WORKER_CTX["args"]
    return (method, multiplier), _evaluate_cell(s, learner, folds, master_seed,
                                                method, multiplier, mult_index)


def quality_grid(s: Dataset, learner: LearnerSpec, methods: list[str],
                 multipliers: list[float], k: int, seed: int,
                 workers: int = 1,
                 precomputed: dict[tuple[str, float], np.ndarray | str] | None = None) -> QualityGrid:
    """Evaluate every (method, multiplier) cell plus the no-resampling cell.

    All cells share one fold assignment. Each cell derives its own RNG
    stream, so results are identical for any worker count or evaluation
    order. `precomputed` entries (cached fold vectors, or skip-reason
    strings) are trusted and not rerun.
    """
    if not multipliers:
        raise ValueError("multiplier list must be non-empty")
    methods = [m for m in methods if m != "none"]
    if not methods:
        raise ValueError("method list must be non-empty")
    multipliers = [float(m) for m in multipliers]
    folds = stratified_folds(s, k, derive_seed(seed, s.id, "folds"))
    grid = QualityGrid(dataset_id=s.id, learner_id=learner.token(), k=k, seed=seed,
                       methods=list(methods), multipliers=multipliers)
    precomputed = precomputed or {}

    tasks = [("none", 1.0, -1)]
    for method in methods:
        for i, m in enumerate(multipliers):
            tasks.append((method, m, i))
    pending = [t for t in tasks if (t[0], t[1]) not in precomputed]

    results: dict[tuple[str, float], np.ndarray | str] = {}
    for key, value in precomputed.items():
        results[key] = value if isinstance(value, str) else np.asarray(value, dtype=np.float64)
    if workers > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_grid_worker,
                                 initargs=(s, learner, folds, seed)) as pool:
            for key, value in pool.map(_grid_cell_task, pending):
                results[key] = value
    else:
        for method, m, i in pending:
            results[(method, m)] = _evaluate_cell(s, learner, folds, seed, method, m, i)

    for method, m, _ in tasks:
        value = results[(method, m)]
        if isinstance(value, str):
            grid.skips[(method, m)] = value
        else:
            grid.cells[(method, m)] = value
    return grid


def save_grid(grid: QualityGrid, csv_path: str | Path) -> None:
    """Long-format CSV plus a skip sidecar and a JSON meta file; reload is bit-exact."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with csv_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset_id", "learner", "method", "multiplier", "fold", "score"])
        for key in grid.cell_keys():
            if key not in grid.cells:
                continue
            method, m = key
            for j, score in enumerate(grid.cells[key]):
                writer.writerow([grid.dataset_id, grid.learner_id, method,
                                 repr(float(m)), j, repr(float(score))])
    with _skips_path(csv_path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset_id", "learner", "method", "multiplier", "reason"])
        for key in grid.cell_keys():
            if key in grid.skips:
                writer.writerow([grid.dataset_id, grid.learner_id, key[0],
                                 repr(float(key[1])), grid.skips[key]])
    meta = {
        "dataset_id": grid.dataset_id,
        "learner": grid.learner_id,
        "k": grid.k,
        "seed": grid.seed,
        "methods": grid.methods,
        "multipliers": [repr(float(m)) for m in grid.multipliers],
    }
    _meta_path(csv_path).write_text(json.dumps(meta, sort_keys=True), encoding="utf-8")


def _skips_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".skips.csv")


def _meta_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".meta.json")


def load_grid(csv_path: str | Path) -> QualityGrid:
    csv_path = Path(csv_path)
    meta = json.loads(_meta_path(csv_path).read_text(encoding="utf-8"))
    by_cell: dict[tuple[str, float], dict[int, float]] = {}
    with csv_path.open("r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["method"], float(row["multiplier"]))
            by_cell.setdefault(key, {})[int(row["fold"])] = float(row["score"])
    cells = {}
    for key, folds in by_cell.items():
        vec = np.array([folds[j] for j in sorted(folds)], dtype=np.float64)
        cells[key] = vec
    skips = {}
    skips_file = _skips_path(csv_path)
    if skips_file.exists():
        with skips_file.open("r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                skips[(row["method"], float(row["multiplier"]))] = row["reason"]
    return QualityGrid(
        dataset_id=meta["dataset_id"], learner_id=meta["learner"], k=int(meta["k"]),
        seed=int(meta["seed"]), methods=list(meta["methods"]),
        multipliers=[float(m) for m in meta["multipliers"]], cells=cells, skips=skips)
