"""Run configuration: one JSON document drives the whole pipeline.

Defaults are the paper-level experiment constants (k=20 folds, multipliers
1.25..10.0 step 0.25, epsilon 0.75, alpha 0.05, k'=10). Command-line flags
override file values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .data import MixtureConfig
from .learners import DEFAULT_LEARNERS, LearnerSpec
from .recommender import DEFAULT_PRESETS, PRESETS

DEFAULT_METHODS = ["ros", "rus", "smote1", "smote3", "smote5", "smote7"]


@dataclass(frozen=True)
class MultiplierGrid:
    min: float = 1.25
    max: float = 10.0
    step: float = 0.25

    def __post_init__(self):
        if self.min < 1.0 or self.max < self.min or self.step <= 0:
            raise ValueError("invalid multiplier grid")

    def values(self) -> list[float]:
        out = []
        i = 0
        while True:
            m = round(self.min + i * self.step, 10)
            if m > self.max + 1e-9:
                break
            out.append(m)
            i += 1
        return out


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    out: str = "out"
    learner: LearnerSpec = field(default_factory=lambda: DEFAULT_LEARNERS["decision_tree"])
    methods: tuple[str, ...] = tuple(DEFAULT_METHODS)
    multipliers: MultiplierGrid = field(default_factory=MultiplierGrid)
    k: int = 20
    k_prime: int = 10
    alpha: float = 0.05
    epsilon: float = 0.75
    count: int = 60
    mixture: MixtureConfig = field(default_factory=MixtureConfig)
    csv_dir: str | None = None
    label_column: str = "label"
    approaches: tuple[str, ...] = ("a1", "a2")
    presets: dict = field(default_factory=dict)  # approach -> preset name
    use_windowed_pval_for_targets: bool = False
    workers: int = 1

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must be in (0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not self.methods:
            raise ValueError("method list must be non-empty")
        for a in self.approaches:
            if a not in ("a1", "a2"):
                raise ValueError(f"unknown approach {a!r}")

    def preset_for(self, approach: str) -> str:
        if approach in self.presets:
            name = self.presets[approach]
        else:
            name = DEFAULT_PRESETS.get((approach, self.learner.kind))
            if name is None:
                raise ValueError(f"no default preset for {approach}/{self.learner.kind}")
        if name not in PRESETS:
            raise ValueError(f"unknown preset {name!r}")
        return name

    def out_dir(self) -> Path:
        return Path(self.out)

    def multiplier_values(self) -> list[float]:
        return self.multipliers.values()


def _mixture_from_dict(d: dict) -> MixtureConfig:
    kwargs = {}
    for name in ("dim_range", "size_range", "minor_fraction_range", "components_range",
                 "mean_range", "cov_scale_range"):
        if name in d:
            lo, hi = d[name]
            kwargs[name] = (lo, hi)
    if "seed" in d:
        kwargs["seed"] = int(d["seed"])
    return MixtureConfig(**kwargs)


def config_from_dict(doc: dict) -> RunConfig:
    kwargs: dict = {}
    for name in ("seed", "out", "k", "k_prime", "alpha", "epsilon", "count",
                 "csv_dir", "label_column", "use_windowed_pval_for_targets", "workers"):
        if name in doc:
            kwargs[name] = doc[name]
    if "learner" in doc:
        learner = doc["learner"]
        if isinstance(learner, str):
            kwargs["learner"] = DEFAULT_LEARNERS[learner]
        else:
            base = DEFAULT_LEARNERS[learner["kind"]].to_dict()
            base.update(learner)
            kwargs["learner"] = LearnerSpec.from_dict(base)
    if "methods" in doc:
        kwargs["methods"] = tuple(doc["methods"])
    if "multipliers" in doc:
        m = doc["multipliers"]
        kwargs["multipliers"] = MultiplierGrid(min=float(m["min"]), max=float(m["max"]),
                                               step=float(m["step"]))
    if "mixture" in doc:
        kwargs["mixture"] = _mixture_from_dict(doc["mixture"])
    if "approaches" in doc:
        kwargs["approaches"] = tuple(doc["approaches"])
    if "presets" in doc:
        kwargs["presets"] = dict(doc["presets"])
    cfg = RunConfig(**kwargs)
    # the generator seed follows the master seed unless set explicitly
    if "mixture" not in doc or "seed" not in doc.get("mixture", {}):
        cfg = replace(cfg, mixture=replace(cfg.mixture, seed=cfg.seed))
    return cfg


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    doc: dict = {}
    if path is not None:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if overrides:
        doc.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(doc)
