"""Pipeline commands: gen -> grid -> meta -> train -> recommend / assess -> report.

Artifacts live under the configured output directory:

    datasets/<id>.csv + manifest.json
    grids/<id>.csv (+ .skips.csv, .meta.json, .cache.json)
    meta.csv + meta.meta.json
    models/<approach>.json
    report/ra.csv, ecdf_<strategy>.csv, summary.json, ecdf.svg

Grid evaluation is resumable: cells already on disk are reused as long as
the content hash of the inputs (dataset bytes, learner, grid definition,
seed) matches; a mismatch is refused so stale caches can never leak into
results.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .assessment import ALL_STATIC_STRATEGIES, assess_bank, format_ara_table, write_report
from .config import RunConfig
from .data import Dataset, generate_mixture, ingest_csv, write_csv
from .evaluation import QualityGrid, load_grid, quality_grid, save_grid
from .metafeatures import META_FEATURE_NAMES, MetaFeatures, compute_meta_features
from .qualityvars import (CellVars, MethodVars, QualityVariables, binarize_targets,
                          format_multiplier, quality_row)
from .recommender import (PRESETS, MetaRecord, build_meta_dataset, load_recommender,
                          recommend, save_recommender, train)


class PipelineError(Exception):
    """Command failure with a machine-parseable code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


APPROACH_LABELS = {"a1": "rec1", "a2": "rec2"}


def _manifest_path(cfg: RunConfig) -> Path:
    return cfg.out_dir() / "datasets" / "manifest.json"


def _hash_bytes(*chunks: bytes) -> str:
    h = hashlib.blake2b(digest_size=16)
    for chunk in chunks:
        h.update(chunk)
    return h.hexdigest()


def _gen_config_doc(cfg: RunConfig) -> dict:
    mix = cfg.mixture
    return {
        "seed": cfg.seed,
        "count": cfg.count,
        "mixture": {
            "dim_range": list(mix.dim_range),
            "size_range": list(mix.size_range),
            "minor_fraction_range": list(mix.minor_fraction_range),
            "components_range": list(mix.components_range),
            "mean_range": list(mix.mean_range),
            "cov_scale_range": list(mix.cov_scale_range),
            "seed": mix.seed,
        },
    }


def cmd_gen(cfg: RunConfig) -> None:
    """Write `count` synthetic datasets plus a manifest."""
    ds_dir = cfg.out_dir() / "datasets"
    ds_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for index in range(cfg.count):
        s = generate_mixture(cfg.mixture, index)
        fname = f"{s.id}.csv"
        write_csv(s, ds_dir / fname, label_column=cfg.label_column)
        entries.append({"id": s.id, "file": fname, "rows": s.n, "dim": s.dim,
                        "n_minor": s.n_minor})
    manifest = {
        "format": "resamplerec-manifest",
        "config": _gen_config_doc(cfg),
        "config_hash": _hash_bytes(json.dumps(_gen_config_doc(cfg), sort_keys=True).encode()),
        "datasets": entries,
    }
    _manifest_path(cfg).write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n",
                                   encoding="utf-8")
    print(f"gen: wrote {len(entries)} datasets to {ds_dir}")


def load_bank(cfg: RunConfig) -> list[Dataset]:
    """Datasets from the manifest and/or a user-provided CSV directory."""
    out: list[Dataset] = []
    manifest = _manifest_path(cfg)
    if manifest.exists():
        doc = json.loads(manifest.read_text(encoding="utf-8"))
        for entry in doc["datasets"]:
            path = manifest.parent / entry["file"]
            if not path.exists():
                raise PipelineError("E_MISSING_INPUT", f"dataset file missing: {path}")
            out.append(ingest_csv(path, label_column=cfg.label_column,
                                  dataset_id=entry["id"]))
    if cfg.csv_dir:
        for path in sorted(Path(cfg.csv_dir).glob("*.csv")):
            out.append(ingest_csv(path, label_column=cfg.label_column))
    if not out:
        raise PipelineError("E_MISSING_INPUT",
                            "no datasets: run `gen` first or set csv_dir")
    return out


def _grid_def_doc(cfg: RunConfig) -> dict:
    return {
        "learner": cfg.learner.to_dict(),
        "methods": list(cfg.methods),
        "multipliers": [repr(m) for m in cfg.multiplier_values()],
        "k": cfg.k,
        "seed": cfg.seed,
    }


def _grid_input_hash(cfg: RunConfig, dataset_csv_bytes: bytes) -> str:
    return _hash_bytes(dataset_csv_bytes,
                       json.dumps(_grid_def_doc(cfg), sort_keys=True).encode())


def _grid_paths(cfg: RunConfig, dataset_id: str) -> tuple[Path, Path]:
    grid_dir = cfg.out_dir() / "grids"
    return grid_dir / f"{dataset_id}.csv", grid_dir / f"{dataset_id}.cache.json"


def _compute_grid_for(cfg: RunConfig, s: Dataset, workers: int = 1) -> tuple[str, int, int]:
    """Compute (or resume) one dataset's grid; returns (id, computed, cached)."""
    csv_path, cache_path = _grid_paths(cfg, s.id)
    input_hash = _grid_input_hash(cfg, _dataset_bytes(cfg, s))
    precomputed: dict = {}
    if cache_path.exists():
        cache = json.loads(cache_path.read_text(encoding="utf-8"))
        if cache.get("input_hash") != input_hash:
            raise PipelineError(
                "E_CACHE_MISMATCH",
                f"grid inputs changed for {s.id}; delete {csv_path.parent} to recompute")
        if csv_path.exists():
            old = load_grid(csv_path)
            precomputed.update(old.cells)
            precomputed.update(old.skips)
    n_cells = 1 + len(cfg.methods) * len(cfg.multiplier_values())
    cached = sum(1 for key in precomputed)
    grid = quality_grid(s, cfg.learner, list(cfg.methods), cfg.multiplier_values(),
                        cfg.k, cfg.seed, workers=workers, precomputed=precomputed)
    save_grid(grid, csv_path)
    cache_path.write_text(json.dumps({"input_hash": input_hash}, sort_keys=True),
                          encoding="utf-8")
    return s.id, n_cells - cached, cached


def _dataset_bytes(cfg: RunConfig, s: Dataset) -> bytes:
    path = cfg.out_dir() / "datasets" / f"{s.id}.csv"
    if path.exists():
        return path.read_bytes()
    if cfg.csv_dir and (Path(cfg.csv_dir) / f"{s.id}.csv").exists():
        return (Path(cfg.csv_dir) / f"{s.id}.csv").read_bytes()
    # datasets passed in memory (library use): hash the values themselves
    return s.features.tobytes() + s.labels.tobytes()


_GRID_WORKER_CFG: dict = {}


def _init_grid_pool(cfg: RunConfig):
    _GRID_WORKER_CFG["cfg"] = cfg


def _grid_pool_task(s: Dataset):
    return _compute_grid_for(_GRID_WORKER_CFG["cfg"], s, workers=1)


def cmd_grid(cfg: RunConfig) -> None:
    """Evaluate one quality grid per dataset, reusing cached cells."""
    bank = load_bank(cfg)
    results: list[tuple[str, int, int]] = []
    if cfg.workers > 1 and len(bank) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers, initializer=_init_grid_pool,
                                 initargs=(cfg,)) as pool:
            results = list(pool.map(_grid_pool_task, bank))
    else:
        for s in bank:
            results.append(_compute_grid_for(cfg, s, workers=cfg.workers))
    computed = sum(r[1] for r in results)
    cached = sum(r[2] for r in results)
    total = computed + cached
    for ds_id, comp, cach in results:
        print(f"grid {ds_id}: {comp} computed, {cach} cached")
    pct = 100.0 * cached / total if total else 0.0
    print(f"grid: {computed} cells computed, {cached} cached ({pct:.1f}% cache hits)")


def load_grids(cfg: RunConfig, bank: list[Dataset]) -> list[QualityGrid]:
    grids = []
    for s in bank:
        csv_path, _ = _grid_paths(cfg, s.id)
        if not csv_path.exists():
            raise PipelineError("E_MISSING_INPUT", f"grid missing for {s.id}: run `grid` first")
        grids.append(load_grid(csv_path))
    return grids


def _meta_columns(cfg: RunConfig) -> list[str]:
    cols = ["dataset_id"]
    cols.extend(META_FEATURE_NAMES)
    cols.append("q0mean")
    for method in cfg.methods:
        for m in cfg.multiplier_values():
            suffix = f"[{method}][{format_multiplier(m)}]"
            cols.extend(f"{p}{suffix}" for p in ("qmean", "qpval", "qpvalw", "y"))
        cols.extend(f"{p}[{method}]" for p in ("yr", "zr", "mstar", "qmeanstar", "qpvalstar"))
    return cols


def cmd_meta(cfg: RunConfig) -> None:
    """Build the meta-dataset (one wide CSV row per dataset)."""
    bank = load_bank(cfg)
    grids = load_grids(cfg, bank)
    records = build_meta_dataset(list(zip(bank, grids)), cfg.epsilon, cfg.alpha)
    columns = _meta_columns(cfg)
    meta_path = cfg.out_dir() / "meta.csv"
    with meta_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for rec in records:
            row = {"dataset_id": rec.dataset_id}
            row.update({name: repr(v) for name, v in rec.features.as_dict().items()})
            row.update(quality_row(rec.qv, rec.targets))
            writer.writerow(row)
    sidecar = {
        "epsilon": cfg.epsilon,
        "alpha": cfg.alpha,
        "methods": list(cfg.methods),
        "multipliers": [repr(m) for m in cfg.multiplier_values()],
        "k": cfg.k,
        "learner": cfg.learner.token(),
    }
    (cfg.out_dir() / "meta.meta.json").write_text(json.dumps(sidecar, sort_keys=True),
                                                  encoding="utf-8")
    print(f"meta: wrote {len(records)} meta-examples to {meta_path}")


def read_meta_csv(cfg: RunConfig) -> list[MetaRecord]:
    """Rebuild MetaRecords from meta.csv (floats round-trip exactly via repr)."""
    meta_path = cfg.out_dir() / "meta.csv"
    sidecar_path = cfg.out_dir() / "meta.meta.json"
    if not meta_path.exists() or not sidecar_path.exists():
        raise PipelineError("E_MISSING_INPUT", "meta.csv missing: run `meta` first")
    sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
    epsilon = float(sidecar["epsilon"])
    alpha = float(sidecar["alpha"])
    methods = list(sidecar["methods"])
    multipliers = [float(m) for m in sidecar["multipliers"]]
    records = []
    with meta_path.open("r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            features = MetaFeatures(np.array([float(row[name])
                                              for name in META_FEATURE_NAMES]))
            cells = {}
            per_method = {}
            for method in methods:
                for m in multipliers:
                    suffix = f"[{method}][{format_multiplier(m)}]"
                    if row[f"qmean{suffix}"] == "":
                        continue
                    cells[(method, m)] = CellVars(
                        q_mean=float(row[f"qmean{suffix}"]),
                        q_pval=float(row[f"qpval{suffix}"]),
                        q_pvalw=float(row[f"qpvalw{suffix}"]),
                    )
                if row[f"mstar[{method}]"] != "":
                    per_method[method] = MethodVars(
                        m_star=float(row[f"mstar[{method}]"]),
                        q_mean_at_star=float(row[f"qmeanstar[{method}]"]),
                        q_pval_at_star=float(row[f"qpvalstar[{method}]"]),
                    )
            qv = QualityVariables(q0_mean=float(row["q0mean"]), epsilon=epsilon,
                                  methods=tuple(methods),
                                  multipliers=tuple(multipliers),
                                  cells=cells, per_method=per_method)
            records.append(MetaRecord(
                dataset_id=row["dataset_id"], features=features, qv=qv,
                targets=binarize_targets(qv, alpha, cfg.use_windowed_pval_for_targets)))
    return records


def cmd_train(cfg: RunConfig) -> None:
    """Train one recommender per configured approach on the full meta-dataset."""
    records = read_meta_csv(cfg)
    model_dir = cfg.out_dir() / "models"
    model_dir.mkdir(parents=True, exist_ok=True)
    for approach in cfg.approaches:
        preset = PRESETS[cfg.preset_for(approach)]
        model = train(records, preset,
                      use_windowed_pval_for_targets=cfg.use_windowed_pval_for_targets)
        path = model_dir / f"{approach}.json"
        save_recommender(model, path)
        print(f"train: {approach} ({preset.name}) -> {path}")


def cmd_recommend(cfg: RunConfig, model_path: str, data_path: str) -> None:
    """Print `method,multiplier` plus a JSON detail record for one dataset."""
    if not Path(model_path).exists():
        raise PipelineError("E_MISSING_INPUT", f"model file missing: {model_path}")
    if not Path(data_path).exists():
        raise PipelineError("E_MISSING_INPUT", f"data file missing: {data_path}")
    model = load_recommender(model_path)
    s = ingest_csv(data_path, label_column=cfg.label_column)
    rec = recommend(model, s)
    print(f"{rec.spec.method},{format_multiplier(rec.spec.multiplier)}")
    print(json.dumps({"method": rec.spec.method,
                      "multiplier": rec.spec.multiplier,
                      "provenance": rec.provenance,
                      "details": rec.details}, sort_keys=True))


def cmd_assess(cfg: RunConfig) -> None:
    """Meta-level k'-fold CV of the recommenders against the static strategies."""
    bank = load_bank(cfg)
    grids = load_grids(cfg, bank)
    records = read_meta_csv(cfg)
    ids_with_meta = {r.dataset_id for r in records}
    missing = [s.id for s in bank if s.id not in ids_with_meta]
    if missing:
        raise PipelineError("E_MISSING_INPUT", f"meta.csv lacks rows for: {missing[:3]}")
    recommender_cfgs = [(APPROACH_LABELS[a], PRESETS[cfg.preset_for(a)])
                        for a in cfg.approaches]
    report = assess_bank(list(zip(bank, grids)), recommender_cfgs,
                         ALL_STATIC_STRATEGIES, cfg.k_prime, cfg.seed, cfg.learner,
                         cfg.epsilon, cfg.alpha, workers=cfg.workers,
                         meta_records=records,
                         use_windowed_pval_for_targets=cfg.use_windowed_pval_for_targets)
    report_dir = cfg.out_dir() / "report"
    write_report(report, report_dir)
    print(format_ara_table(report.ara))
    print(f"assess: report written to {report_dir}")


def cmd_report(cfg: RunConfig) -> None:
    """Re-render the mean-RA table from an existing report."""
    ra_path = cfg.out_dir() / "report" / "ra.csv"
    if not ra_path.exists():
        raise PipelineError("E_MISSING_INPUT", "report/ra.csv missing: run `assess` first")
    by_strategy: dict[str, list[float]] = {}
    with ra_path.open("r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            by_strategy.setdefault(row["strategy"], []).append(float(row["ra"]))
    ara = {name: float(np.mean(vals)) for name, vals in by_strategy.items()}
    print(format_ara_table(ara))
