"""Resampling methods: random over-/under-sampling and SMOTE.

Every method takes a multiplier m >= 1 and moves the imbalance ratio from
IR to IR/m (up to integer rounding of the add/drop counts).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .data import Dataset, imbalance_ratio, round_half_up
from .rng import derive_rng

METHOD_NONE = "none"
METHOD_ROS = "ros"
METHOD_RUS = "rus"

_SMOTE_RE = re.compile(r"^smote(\d+)$")

# float slack for m <= IR checks: IR values come from small-integer divisions
_IR_TOL = 1e-9


@dataclass(frozen=True)
class ResamplingSpec:
    """A method token plus multiplier.

    Tokens: "none", "ros", "rus", "smote<k>" (e.g. "smote5").
    """

    method: str
    multiplier: float = 1.0

    def __post_init__(self):
        if self.method != METHOD_NONE and self.multiplier < 1.0:
            raise ValueError("multiplier must be >= 1")
        if self.method == METHOD_NONE:
            object.__setattr__(self, "multiplier", 1.0)
        elif self.method not in (METHOD_ROS, METHOD_RUS) and self.smote_k is None:
            raise ValueError(f"unknown resampling method {self.method!r}")
        if self.smote_k is not None and self.smote_k < 1:
            raise ValueError("smote needs k >= 1 neighbors")
        object.__setattr__(self, "multiplier", float(self.multiplier))

    @property
    def smote_k(self) -> int | None:
        m = _SMOTE_RE.match(self.method)
        return int(m.group(1)) if m else None

    def token(self) -> str:
        return f"{self.method},{format(self.multiplier, '.10g')}"

    @staticmethod
    def parse(text: str) -> "ResamplingSpec":
        parts = text.strip().split(",")
        if len(parts) == 1:
            return ResamplingSpec(parts[0])
        if len(parts) != 2:
            raise ValueError(f"cannot parse resampling spec {text!r}")
        return ResamplingSpec(parts[0], float(parts[1]))


def feasible(spec: ResamplingSpec, n_major: int, n_minor: int) -> str | None:
    """Return None when spec applies to the given class counts, else a reason."""
    if spec.method == METHOD_NONE:
        return None
    if spec.method == METHOD_RUS:
        ir = n_major / n_minor
        if spec.multiplier > ir * (1.0 + _IR_TOL):
            return f"rus multiplier {spec.multiplier:g} exceeds IR {ir:g}"
        return None
    k = spec.smote_k
    if k is not None and n_minor < k + 1:
        return f"smote needs at least {k + 1} minor points, have {n_minor}"
    return None


def random_oversample(s: Dataset, m: float, seed: int) -> Dataset:
    """Append round((m-1)*|C1|) uniform-with-replacement copies of minor rows."""
    if m < 1.0:
        raise ValueError("multiplier must be >= 1")
    n_add = round_half_up((m - 1.0) * s.n_minor)
    if n_add == 0:
        return s
    rng = derive_rng(seed, "ros")
    minor_idx = np.flatnonzero(s.labels == 1)
    picks = minor_idx[rng.integers(0, minor_idx.size, size=n_add)]
    x = np.vstack([s.features, s.features[picks]])
    y = np.concatenate([s.labels, np.ones(n_add, dtype=np.int64)])
    return Dataset(id=s.id, features=x, labels=y)


def random_undersample(s: Dataset, m: float, seed: int) -> Dataset:
    """Drop a uniformly chosen subset of round(((m-1)/m)*|C0|) major rows."""
    if m < 1.0:
        raise ValueError("multiplier must be >= 1")
    ir = imbalance_ratio(s)
    if m > ir * (1.0 + _IR_TOL):
        raise ValueError(f"rus multiplier {m:g} exceeds IR {ir:g}")
    n_drop = round_half_up((m - 1.0) / m * s.n_major)
    if s.n_major - n_drop < 1:
        raise ValueError("undersampling would empty the major class")
    if n_drop == 0:
        return s
    rng = derive_rng(seed, "rus")
    major_idx = np.flatnonzero(s.labels == 0)
    drop = rng.choice(major_idx, size=n_drop, replace=False)
    keep = np.ones(s.n, dtype=bool)
    keep[drop] = False
    return Dataset(id=s.id, features=s.features[keep], labels=s.labels[keep])


def smote(s: Dataset, m: float, k: int, seed: int) -> Dataset:
    """Append synthetic minors on segments to k-nearest minor neighbors.

    Each new point is x_i + u * (x_j - x_i) with u ~ U[0,1], x_i uniform over
    the minor class and x_j uniform over x_i's k nearest minor neighbors
    (Euclidean, self excluded, distance ties broken by lower index).
    """
    if m < 1.0:
        raise ValueError("multiplier must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    minor_idx = np.flatnonzero(s.labels == 1)
    n_minor = minor_idx.size
    if n_minor < k + 1:
        raise ValueError("not enough minor points for k neighbors")
    n_add = round_half_up((m - 1.0) * n_minor)
    if n_add == 0:
        return s
    rng = derive_rng(seed, "smote")
    minors = s.features[minor_idx]
    diff = minors[:, None, :] - minors[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(dist, np.inf)
    # stable sort keeps lower indices first among equal distances
    neighbors = np.argsort(dist, axis=1, kind="stable")[:, :k]
    base = rng.integers(0, n_minor, size=n_add)
    pick = rng.integers(0, k, size=n_add)
    u = rng.uniform(0.0, 1.0, size=n_add)
    a = minors[base]
    b = minors[neighbors[base, pick]]
    synth = a + u[:, None] * (b - a)
    x = np.vstack([s.features, synth])
    y = np.concatenate([s.labels, np.ones(n_add, dtype=np.int64)])
    return Dataset(id=s.id, features=x, labels=y)


def resample(s: Dataset, spec: ResamplingSpec, seed: int) -> Dataset:
    """Apply spec to s; the no-resampling method returns s unchanged."""
    if spec.method == METHOD_NONE:
        return s
    if spec.method == METHOD_ROS:
        return random_oversample(s, spec.multiplier, seed)
    if spec.method == METHOD_RUS:
        return random_undersample(s, spec.multiplier, seed)
    return smote(s, spec.multiplier, spec.smote_k, seed)
