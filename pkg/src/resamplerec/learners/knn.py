"""k-nearest-neighbors scorer: fraction of the k nearest training points labelled 1."""

from __future__ import annotations

import numpy as np


def knn_scores(train_x: np.ndarray, train_y: np.ndarray, query: np.ndarray, k: int) -> np.ndarray:
    """Euclidean neighbors; distance ties broken by lower training index."""
    if k < 1:
        raise ValueError("k must be >= 1")
    k = min(k, train_x.shape[0])
    d2 = ((query[:, None, :] - train_x[None, :, :]) ** 2).sum(axis=2)
    neighbors = np.argsort(d2, axis=1, kind="stable")[:, :k]
    return train_y[neighbors].mean(axis=1)
