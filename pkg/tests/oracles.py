"""Independent reference implementations used only to check the library.

These deliberately take different routes than the production code: the
PR-AUC oracle walks the explicit precision/recall step curve over all
thresholds, the t-tail oracle integrates the density numerically, and the
SMOTE oracle re-derives neighbor sets with plain sorted() instead of numpy.
"""

import math

import numpy as np
from scipy.integrate import quad


def pr_auc_step_curve(labels, scores) -> float:
    """Area under the precision-recall step curve over all score thresholds."""
    labels = np.asarray(labels)
    scores = np.asarray(scores, dtype=float)
    n_pos = int(labels.sum())
    assert n_pos > 0
    ap = 0.0
    prev_recall = 0.0
    for th in sorted(set(scores.tolist()), reverse=True):
        predicted = scores >= th
        tp = int(labels[predicted].sum())
        precision = tp / int(predicted.sum())
        recall = tp / n_pos
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return ap


def student_t_pdf(x: float, df: int) -> float:
    log_c = math.lgamma((df + 1) / 2.0) - math.lgamma(df / 2.0) \
        - 0.5 * math.log(df * math.pi)
    return math.exp(log_c - (df + 1) / 2.0 * math.log1p(x * x / df))


def student_t_sf_quadrature(t: float, df: int) -> float:
    """Upper-tail probability by adaptive quadrature of the density."""
    if t >= 0:
        value, _ = quad(student_t_pdf, t, np.inf, args=(df,), limit=200)
        return value
    value, _ = quad(student_t_pdf, -np.inf, t, args=(df,), limit=200)
    return 1.0 - value


def knn_neighbor_sets(points) -> list[list[int]]:
    """For each point: all other indices sorted by (distance, index)."""
    points = np.asarray(points, dtype=float)
    out = []
    for i in range(len(points)):
        others = [(float(np.linalg.norm(points[j] - points[i])), j)
                  for j in range(len(points)) if j != i]
        out.append([j for _, j in sorted(others)])
    return out


def point_on_some_smote_segment(x, minors, k: int, atol: float = 1e-9) -> bool:
    """Brute force over all (base, neighbor) minor pairs."""
    minors = np.asarray(minors, dtype=float)
    neighbor_sets = knn_neighbor_sets(minors)
    for i in range(len(minors)):
        a = minors[i]
        for j in neighbor_sets[i][:k]:
            b = minors[j]
            d = b - a
            denom = float(d @ d)
            if denom == 0.0:
                if np.allclose(x, a, atol=atol):
                    return True
                continue
            t = float((x - a) @ d) / denom
            if -1e-12 <= t <= 1.0 + 1e-12 and np.allclose(a + t * d, x, atol=atol):
                return True
    return False


def ecdf_share_below(values, x: float) -> float:
    values = np.asarray(values, dtype=float)
    return float((values < x).sum()) / values.size
