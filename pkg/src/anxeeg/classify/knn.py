"""Euclidean k-nearest-neighbour voting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from anxeeg.errors import TrainingError


@dataclass(frozen=True)
class KnnModel:
    X: np.ndarray
    y: np.ndarray
    k: int = 5

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise TrainingError("empty training set")
        if not 1 <= self.k <= X.shape[0]:
            raise TrainingError(f"k={self.k} outside 1..{X.shape[0]}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", np.asarray(self.y))

    def predict(self, Q: np.ndarray) -> np.ndarray:
        Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
        return np.array([_vote(self.X, self.y, q, self.k) for q in Q])


def _vote(X: np.ndarray, y: np.ndarray, q: np.ndarray, k: int):
    d = np.sqrt(np.sum((X - q) ** 2, axis=1))
    # Stable sort: equal distances keep the lower row index first.
    nearest = np.argsort(d, kind="stable")[:k]
    labels = y[nearest]
    uniq, counts = np.unique(labels, return_counts=True)
    tied = uniq[counts == counts.max()]
    if tied.shape[0] == 1:
        return tied[0]
    # Vote tie: smallest summed distance, then the label seen first.
    agg = np.array([d[nearest][labels == lab].sum() for lab in tied])
    cands = tied[agg == agg.min()]
    for lab in labels:
        if lab in cands:
            return lab
    return cands[0]


def knn_classify(X: np.ndarray, y: np.ndarray, query: np.ndarray, k: int = 5):
    """Label of one query row."""
    return KnnModel(X, y, k).predict(query)[0]
