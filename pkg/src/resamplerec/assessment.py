"""Recommendation-accuracy assessment.

RA normalizes the mean CV quality of a chosen cell between the worst and
best cells evaluated for that dataset; ARA averages it over a bank. The
bank-level harness trains recommenders under k'-fold cross-validation over
datasets and compares them against static balance-to-IR-1 strategies, all
normalized on one shared per-dataset pool that includes any cells evaluated
on demand.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .data import Dataset, imbalance_ratio, stratified_folds
from .evaluation import BASELINE_KEY, CellInfeasible, QualityGrid, cv_quality
from .learners import LearnerSpec
from .recommender import (MetaRecord, Recommendation, RecommenderPreset,
                          build_meta_dataset, recommend, train)
from .resampling import ResamplingSpec
from .rng import derive_rng, derive_seed


class StaticStrategy(str, Enum):
    NO_RESAMPLE = "no-resample"
    ROS_EQS = "ros-eqs"
    RUS_EQS = "rus-eqs"
    SMOTE5_EQS = "smote5-eqs"


_EQS_METHODS = {
    StaticStrategy.ROS_EQS: "ros",
    StaticStrategy.RUS_EQS: "rus",
    StaticStrategy.SMOTE5_EQS: "smote5",
}

ALL_STATIC_STRATEGIES = [StaticStrategy.NO_RESAMPLE, StaticStrategy.ROS_EQS,
                         StaticStrategy.RUS_EQS, StaticStrategy.SMOTE5_EQS]


def apply_static(strategy: StaticStrategy, s: Dataset) -> Recommendation:
    """Static baselines: no-resampling, or resample until classes balance."""
    if strategy is StaticStrategy.NO_RESAMPLE:
        return Recommendation(ResamplingSpec("none"), strategy.value)
    return Recommendation(ResamplingSpec(_EQS_METHODS[strategy], imbalance_ratio(s)),
                          strategy.value)


def random_cell_recommendation(grid: QualityGrid, seed: int) -> Recommendation:
    """Uniform draw over the evaluated cells, no-resampling included."""
    keys = [k for k in grid.cell_keys() if k in grid.cells]
    rng = derive_rng(seed, grid.dataset_id, "random-cell")
    method, m = keys[int(rng.integers(0, len(keys)))]
    return Recommendation(ResamplingSpec(method, m), "random-cell")


def _rec_cell_key(rec: Recommendation) -> tuple[str, float]:
    if rec.spec.method == "none":
        return BASELINE_KEY
    return (rec.spec.method, float(rec.spec.multiplier))


def recommendation_accuracy(grid: QualityGrid, rec: Recommendation,
                            dataset: Dataset | None = None,
                            learner: LearnerSpec | None = None,
                            extra_cells: dict[tuple[str, float], float] | None = None) -> float:
    """Min-max-normalized mean quality of the recommended cell.

    The pool is every evaluated grid cell (baseline included) plus any
    `extra_cells` means; an off-grid recommendation is evaluated on demand
    with the grid's own folds when `dataset` and `learner` are supplied.
    Returns 1.0 when the pool has no spread.
    """
    pool = {key: float(v.mean()) for key, v in grid.cells.items()}
    if extra_cells:
        pool.update(extra_cells)
    key = _rec_cell_key(rec)
    if key not in pool:
        if dataset is None or learner is None:
            raise ValueError(f"cell {key} not in grid and no dataset/learner to evaluate it")
        scores = evaluate_cell_on_demand(dataset, grid, learner, ResamplingSpec(*key))
        pool[key] = float(scores.mean())
    lo = min(pool.values())
    hi = max(pool.values())
    if hi == lo:
        return 1.0
    return (pool[key] - lo) / (hi - lo)


def grid_folds(s: Dataset, grid: QualityGrid):
    """Re-derive the exact fold assignment the grid was evaluated with."""
    return stratified_folds(s, grid.k, derive_seed(grid.seed, s.id, "folds"))


def evaluate_cell_on_demand(s: Dataset, grid: QualityGrid, learner: LearnerSpec,
                            spec: ResamplingSpec) -> np.ndarray:
    folds = grid_folds(s, grid)
    seed = derive_seed(grid.seed, s.id, spec.method, "on-demand", repr(float(spec.multiplier)))
    return cv_quality(s, learner, spec, folds, seed)


def _rus_multiplier_cap(s: Dataset, folds) -> float:
    """Largest multiplier feasible on every training split."""
    caps = []
    for j in range(folds.k):
        y = s.labels[~folds.test_mask(j)]
        caps.append(float((y == 0).sum()) / float((y == 1).sum()))
    return min(caps)


def _static_cells_for_dataset(s: Dataset, grid: QualityGrid, learner: LearnerSpec,
                              strategies: list[StaticStrategy]):
    """Evaluate each static strategy's cell; returns {strategy: (key, mean)}.

    RUS-to-balance is capped at the largest multiplier feasible on every
    training split (fold rounding can push IR(train) slightly below IR(S)).
    A cell that still cannot be applied falls back to the baseline cell.
    """
    folds = grid_folds(s, grid)
    out: dict[str, tuple[tuple[str, float], float]] = {}
    for strategy in strategies:
        rec = apply_static(strategy, s)
        key = _rec_cell_key(rec)
        if key == BASELINE_KEY:
            out[strategy.value] = (key, float(grid.baseline.mean()))
            continue
        method, m = key
        if method == "rus":
            m = min(m, _rus_multiplier_cap(s, folds))
            key = (method, m)
        spec = ResamplingSpec(method, m)
        seed = derive_seed(grid.seed, s.id, method, "on-demand", repr(float(m)))
        try:
            scores = cv_quality(s, learner, spec, folds, seed)
        except CellInfeasible:
            out[strategy.value] = (BASELINE_KEY, float(grid.baseline.mean()))
            continue
        out[strategy.value] = (key, float(scores.mean()))
    return out


def _static_cells_task(item):
    s, grid, learner, strategies = item
    return s.id, _static_cells_for_dataset(s, grid, learner, strategies)


@dataclass
class AssessmentReport:
    ra: dict[tuple[str, str], float]          # (dataset_id, strategy) -> RA
    ara: dict[str, float]                     # strategy -> mean RA
    ecdf_points: dict[str, list[tuple[float, float]]]
    metadata: dict = field(default_factory=dict)


def ecdf(values: np.ndarray) -> list[tuple[float, float]]:
    """Point list of y(x) = share of values strictly below x.

    Each distinct value contributes its step as two points; the list starts
    at (0, 0) and ends at y = 1.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("empty input")
    n = values.size
    points: list[tuple[float, float]] = [(0.0, 0.0)]
    for v in np.unique(values):
        below = float((values < v).sum()) / n
        at_or_below = float((values <= v).sum()) / n
        for pt in ((float(v), below), (float(v), at_or_below)):
            if points[-1] != pt:
                points.append(pt)
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    return points


def assess_bank(bank: list[tuple[Dataset, QualityGrid]],
                recommender_cfgs: list[tuple[str, RecommenderPreset]],
                strategies: list[StaticStrategy],
                k_prime: int, seed: int, learner: LearnerSpec,
                epsilon: float, alpha: float,
                workers: int = 1,
                meta_records: list[MetaRecord] | None = None,
                include_random_cell: bool = False,
                use_windowed_pval_for_targets: bool = False) -> AssessmentReport:
    """k'-fold cross-validation over datasets.

    Each recommender is trained on the meta-records of all datasets outside
    the fold and produces one out-of-fold recommendation per dataset; static
    strategies need no training and are applied to every dataset. All RA
    values for one dataset share a single min/max pool.
    """
    if k_prime < 2:
        raise ValueError("k_prime must be >= 2")
    if len(bank) < k_prime:
        raise ValueError("bank too small for k_prime folds")
    datasets = {s.id: s for s, _ in bank}
    grids = {s.id: g for s, g in bank}
    ids = [s.id for s, _ in bank]

    if meta_records is None:
        meta_records = build_meta_dataset(bank, epsilon, alpha)
    records_by_id = {rec.dataset_id: rec for rec in meta_records}

    rng = derive_rng(seed, "meta-cv")
    order = [ids[i] for i in rng.permutation(len(ids))]
    fold_ids = [list(chunk) for chunk in np.array_split(np.array(order, dtype=object), k_prime)]

    recommendations: dict[tuple[str, str], Recommendation] = {}
    fold_train_ids: list[dict] = []
    for j, test_ids in enumerate(fold_ids):
        train_ids = [i for i in order if i not in set(test_ids)]
        train_records = [records_by_id[i] for i in train_ids]
        fold_train_ids.append({"fold": j, "train_ids": sorted(train_ids),
                               "test_ids": sorted(test_ids)})
        for name, preset in recommender_cfgs:
            model = train(train_records, preset,
                          use_windowed_pval_for_targets=use_windowed_pval_for_targets)
            for ds_id in test_ids:
                recommendations[(ds_id, name)] = recommend(model, datasets[ds_id])

    tasks = [(datasets[i], grids[i], learner, strategies) for i in ids]
    static_cells: dict[str, dict] = {}
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for ds_id, cells in pool.map(_static_cells_task, tasks):
                static_cells[ds_id] = cells
    else:
        for item in tasks:
            ds_id, cells = _static_cells_task(item)
            static_cells[ds_id] = cells

    strategy_names = [name for name, _ in recommender_cfgs] + [st.value for st in strategies]
    if include_random_cell:
        strategy_names.append("random-cell")

    ra: dict[tuple[str, str], float] = {}
    for ds_id in ids:
        grid = grids[ds_id]
        extra = {key: mean for key, mean in static_cells[ds_id].values()}
        for name, _ in recommender_cfgs:
            rec = recommendations[(ds_id, name)]
            ra[(ds_id, name)] = recommendation_accuracy(grid, rec, extra_cells=extra)
        for strategy in strategies:
            key, mean = static_cells[ds_id][strategy.value]
            rec = Recommendation(ResamplingSpec(*key), strategy.value)
            ra[(ds_id, strategy.value)] = recommendation_accuracy(grid, rec, extra_cells=extra)
        if include_random_cell:
            rec = random_cell_recommendation(grid, seed)
            ra[(ds_id, "random-cell")] = recommendation_accuracy(grid, rec, extra_cells=extra)

    ara = {name: float(np.mean([ra[(ds_id, name)] for ds_id in ids]))
           for name in strategy_names}
    ecdf_points = {name: ecdf(np.array([ra[(ds_id, name)] for ds_id in ids]))
                   for name in strategy_names}
    metadata = {
        "k_prime": k_prime,
        "seed": seed,
        "learner": learner.token(),
        "n_datasets": len(ids),
        "strategies": strategy_names,
        "meta_cv_folds": fold_train_ids,
        "grid_k": bank[0][1].k if bank else None,
    }
    return AssessmentReport(ra=ra, ara=ara, ecdf_points=ecdf_points, metadata=metadata)


_SVG_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
               "#17becf", "#7f7f7f"]


def ecdf_svg(ecdf_points: dict[str, list[tuple[float, float]]]) -> str:
    """Minimal self-contained SVG line plot of the RA distribution functions."""
    width, height, margin = 640, 440, 60
    px = width - 2 * margin
    py = height - 2 * margin - 20

    def sx(x):
        return margin + x * px

    def sy(y):
        return height - margin - y * py

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="{margin}" y="{sy(1.0):.1f}" width="{px}" height="{py}" '
        'fill="none" stroke="#000"/>',
        f'<text x="{margin + px / 2:.1f}" y="{height - 18}" text-anchor="middle" '
        'font-size="13">RA</text>',
        f'<text x="18" y="{sy(0.5):.1f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 18 {sy(0.5):.1f})">share of datasets below</text>',
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        lines.append(f'<text x="{sx(tick):.1f}" y="{height - margin + 16}" '
                     f'text-anchor="middle" font-size="11">{tick:g}</text>')
        lines.append(f'<text x="{margin - 8}" y="{sy(tick) + 4:.1f}" '
                     f'text-anchor="end" font-size="11">{tick:g}</text>')
    for i, (name, points) in enumerate(sorted(ecdf_points.items())):
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in points)
        lines.append(f'<polyline points="{path}" fill="none" stroke="{color}" '
                     'stroke-width="1.5"/>')
        ly = margin + 14 * i
        lines.append(f'<line x1="{margin + 6}" y1="{ly}" x2="{margin + 26}" y2="{ly}" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        lines.append(f'<text x="{margin + 30}" y="{ly + 4}" font-size="11">{name}</text>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_report(report: AssessmentReport, out_dir: str | Path) -> None:
    """report/ra.csv, report/ecdf_<strategy>.csv, report/summary.json, report/ecdf.svg."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "ra.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset_id", "strategy", "ra"])
        for (ds_id, strategy), value in sorted(report.ra.items()):
            writer.writerow([ds_id, strategy, repr(value)])
    for name, points in sorted(report.ecdf_points.items()):
        with (out_dir / f"ecdf_{name}.csv").open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y"])
            for x, y in points:
                writer.writerow([repr(x), repr(y)])
    summary = {
        "ara": {name: report.ara[name] for name in sorted(report.ara)},
        "metadata": report.metadata,
    }
    (out_dir / "summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    (out_dir / "ecdf.svg").write_text(ecdf_svg(report.ecdf_points), encoding="utf-8")


def format_ara_table(ara: dict[str, float]) -> str:
    """Plain-text mean-RA table in the layout of the headline figures."""
    rows = sorted(ara.items(), key=lambda kv: -kv[1])
    width = max(len(name) for name, _ in rows)
    lines = [f"{'strategy':<{width}}  mean RA", f"{'-' * width}  -------"]
    for name, value in rows:
        lines.append(f"{name:<{width}}  {value:.4f}")
    return "\n".join(lines)
