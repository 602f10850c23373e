"""Dataset-level descriptors fed to the meta-models.

The registry is a fixed, ordered list of 25 base statistics plus a signed-log
companion for each (50 values total); meta-model feature subsets are selected
by these names. See docs/metafeatures.md for the full table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .stats import normal_two_sided_pvalue

_MOMENT_NAMES = ("abs_cov_eig", "skewness", "skew_pval", "kurtosis", "kurt_pval")

BASE_META_FEATURE_NAMES: tuple[str, ...] = (
    "n_objects",
    "n_features",
    "objects_features_ratio",
    "reversed_ir",
    "center_distance",
) + tuple(
    f"{agg}_{stat}_{cls}"
    for stat in _MOMENT_NAMES
    for cls in ("major", "minor")
    for agg in ("min", "max")
)

META_FEATURE_NAMES: tuple[str, ...] = BASE_META_FEATURE_NAMES + tuple(
    f"slog_{name}" for name in BASE_META_FEATURE_NAMES
)

# below this sample size the normality tests are skipped and p = 1.0 is used
MIN_TEST_SAMPLE = 8


def slog(x: float) -> float:
    """Signed log transform sign(x) * ln(1 + |x|); odd, increasing, slog(0) = 0."""
    return math.copysign(math.log1p(abs(x)), x) if x != 0.0 else 0.0


@dataclass(frozen=True)
class MetaFeatures:
    values: np.ndarray  # aligned with META_FEATURE_NAMES

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (len(META_FEATURE_NAMES),):
            raise ValueError(f"expected {len(META_FEATURE_NAMES)} values, got {v.shape}")
        if not np.isfinite(v).all():
            raise ValueError("meta-features must be finite")
        object.__setattr__(self, "values", v)
        self.values.setflags(write=False)

    def __getitem__(self, name: str) -> float:
        return float(self.values[META_FEATURE_NAMES.index(name)])

    def select(self, names: list[str]) -> np.ndarray:
        return np.array([self[name] for name in names])

    def as_dict(self) -> dict[str, float]:
        return {name: float(v) for name, v in zip(META_FEATURE_NAMES, self.values)}


def _central_moments(sample: np.ndarray) -> tuple[float, float, float]:
    mean = sample.mean()
    dev = sample - mean
    return float((dev ** 2).mean()), float((dev ** 3).mean()), float((dev ** 4).mean())


def skewness(sample: np.ndarray) -> float:
    """Adjusted Fisher-Pearson skewness; 0.0 for n < 3 or zero variance."""
    n = sample.shape[0]
    if n < 3:
        return 0.0
    m2, m3, _ = _central_moments(sample)
    if m2 <= 0.0:
        return 0.0
    g1 = m3 / m2 ** 1.5
    return math.sqrt(n * (n - 1)) / (n - 2) * g1


def kurtosis(sample: np.ndarray) -> float:
    """Excess kurtosis m4/m2^2 - 3; 0.0 for zero variance."""
    m2, _, m4 = _central_moments(sample)
    if m2 <= 0.0:
        return 0.0
    return m4 / m2 ** 2 - 3.0


def skew_test_zstat(sample: np.ndarray) -> float:
    """D'Agostino's normality Z for sample skewness."""
    n = sample.shape[0]
    if n < MIN_TEST_SAMPLE:
        raise ValueError(f"skewness test needs n >= {MIN_TEST_SAMPLE}")
    m2, m3, _ = _central_moments(sample)
    if m2 <= 0.0:
        raise ValueError("zero-variance sample")
    g1 = m3 / m2 ** 1.5
    y = g1 * math.sqrt((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0)))
    beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0) \
        / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0))
    w2 = -1.0 + math.sqrt(2.0 * (beta2 - 1.0))
    delta = 1.0 / math.sqrt(0.5 * math.log(w2))
    alpha = math.sqrt(2.0 / (w2 - 1.0))
    return delta * math.asinh(y / alpha)


def kurt_test_zstat(sample: np.ndarray) -> float:
    """Anscombe-Glynn normality Z for sample kurtosis."""
    n = sample.shape[0]
    if n < MIN_TEST_SAMPLE:
        raise ValueError(f"kurtosis test needs n >= {MIN_TEST_SAMPLE}")
    m2, _, m4 = _central_moments(sample)
    if m2 <= 0.0:
        raise ValueError("zero-variance sample")
    b2 = m4 / m2 ** 2
    mean_b2 = 3.0 * (n - 1.0) / (n + 1.0)
    var_b2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) ** 2 * (n + 3.0) * (n + 5.0))
    x = (b2 - mean_b2) / math.sqrt(var_b2)
    sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0)) \
        * math.sqrt(6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0)))
    a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + math.sqrt(1.0 + 4.0 / sqrt_beta1 ** 2))
    term1 = 1.0 - 2.0 / (9.0 * a)
    denom = 1.0 + x * math.sqrt(2.0 / (a - 4.0))
    if denom == 0.0:
        raise ValueError("degenerate kurtosis statistic")
    term2 = math.copysign(abs((1.0 - 2.0 / a) / denom) ** (1.0 / 3.0), denom)
    return (term1 - term2) / math.sqrt(2.0 / (9.0 * a))


def skew_test_pvalue(sample: np.ndarray) -> float:
    """Two-sided p-value of the skewness normality test; 1.0 on zero variance."""
    sample = np.asarray(sample, dtype=np.float64)
    try:
        z = skew_test_zstat(sample)
    except ValueError as exc:
        if "zero-variance" in str(exc):
            return 1.0
        raise
    return normal_two_sided_pvalue(z)


def kurt_test_pvalue(sample: np.ndarray) -> float:
    """Two-sided p-value of the kurtosis normality test; 1.0 on zero variance."""
    sample = np.asarray(sample, dtype=np.float64)
    try:
        z = kurt_test_zstat(sample)
    except ValueError as exc:
        if "zero-variance" in str(exc) or "degenerate" in str(exc):
            return 1.0
        raise
    return normal_two_sided_pvalue(z)


def _abs_cov_eigs(x: np.ndarray) -> tuple[float, float]:
    cov = np.atleast_2d(np.cov(x, rowvar=False, ddof=1))
    eigs = np.abs(np.linalg.eigvalsh(cov))
    return float(eigs.min()), float(eigs.max())


def compute_meta_features(s: Dataset) -> MetaFeatures:
    """Full 50-value registry vector; requires >= 2 points per class."""
    by_class = {c: s.features[s.labels == c] for c in (0, 1)}
    for c, x in by_class.items():
        if x.shape[0] < 2:
            raise ValueError(f"class {c} has fewer than 2 elements")
    center_dist = float(np.linalg.norm(by_class[0].mean(axis=0) - by_class[1].mean(axis=0)))
    base = [
        float(s.n),
        float(s.dim),
        s.n / s.dim,
        s.n_minor / s.n_major,
        center_dist,
    ]
    for stat in _MOMENT_NAMES:
        for c in (0, 1):
            x = by_class[c]
            n_c = x.shape[0]
            if stat == "abs_cov_eig":
                lo, hi = _abs_cov_eigs(x)
            elif stat == "skewness":
                vals = [skewness(x[:, f]) for f in range(x.shape[1])]
                lo, hi = min(vals), max(vals)
            elif stat == "skew_pval":
                if n_c < MIN_TEST_SAMPLE:
                    lo = hi = 1.0
                else:
                    vals = [skew_test_pvalue(x[:, f]) for f in range(x.shape[1])]
                    lo, hi = min(vals), max(vals)
            elif stat == "kurtosis":
                vals = [kurtosis(x[:, f]) for f in range(x.shape[1])]
                lo, hi = min(vals), max(vals)
            else:
                if n_c < MIN_TEST_SAMPLE:
                    lo = hi = 1.0
                else:
                    vals = [kurt_test_pvalue(x[:, f]) for f in range(x.shape[1])]
                    lo, hi = min(vals), max(vals)
            base.extend([lo, hi])
    values = base + [slog(v) for v in base]
    return MetaFeatures(values=np.array(values))
