"""Feature matrices, group bookkeeping and train-only normalization."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from anxeeg.errors import FeatureError, TrainingError
from anxeeg.features.vector import FeatureVector


@dataclass(frozen=True)
class Dataset:
    """Rows are trials; ``blocks`` records ``(family, group, start, stop)`` column spans."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]
    blocks: tuple[tuple[str, str, int, int], ...] = ()
    subjects: tuple[str, ...] = ()
    keys: tuple = field(default=(), compare=False)

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y)
        if X.ndim != 2:
            raise FeatureError("feature matrix must be 2-D")
        if X.shape[0] != y.shape[0]:
            raise FeatureError(f"{X.shape[0]} rows for {y.shape[0]} labels")
        if len(self.feature_names) != X.shape[1]:
            raise FeatureError(f"{len(self.feature_names)} names for {X.shape[1]} columns")
        if self.subjects and len(self.subjects) != X.shape[0]:
            raise FeatureError("subject tags must match row count")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def dimensions(self) -> dict[str, int]:
        """Columns per family."""
        return {fam: b - a for fam, _, a, b in self.blocks}

    @property
    def group_dimensions(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for _, group, a, b in self.blocks:
            out[group] = out.get(group, 0) + (b - a)
        return out

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        subjects = tuple(np.asarray(self.subjects, dtype=object)[rows]) if self.subjects else ()
        keys = tuple(np.asarray(self.keys, dtype=object)[rows]) if self.keys else ()
        return Dataset(self.X[rows], self.y[rows], self.feature_names, self.blocks, subjects, keys)

    def select(self, families: Sequence[str]) -> "Dataset":
        """Columns of the named families, in manifest (block) order."""
        wanted = set(families)
        cols, blocks, pos = [], [], 0
        for fam, group, a, b in self.blocks:
            if fam in wanted:
                cols.extend(range(a, b))
                blocks.append((fam, group, pos, pos + b - a))
                pos += b - a
        if not cols:
            raise FeatureError("empty feature selection")
        missing = wanted - {b[0] for b in self.blocks}
        if missing:
            raise FeatureError(f"families not in dataset: {sorted(missing)}")
        names = tuple(self.feature_names[c] for c in cols)
        return Dataset(self.X[:, cols], self.y, names, tuple(blocks), self.subjects, self.keys)


def group_features(rows: Sequence[Sequence[FeatureVector]], labels: Sequence,
                   expected: dict[str, int] | None = None,
                   subjects: Sequence[str] = (), keys: Sequence = ()) -> Dataset:
    """Stack per-trial family vectors into a Dataset.

    Every row must carry the same families with the same names. ``expected``
    maps family name to its manifest dimension and is checked if given.
    """
    if not rows:
        raise FeatureError("empty selection: no trials")
    first = rows[0]
    if not first:
        raise FeatureError("empty selection: no feature families")
    layout = [(v.family, v.group, v.names) for v in first]
    blocks, pos = [], 0
    for fam, group, names in layout:
        if expected is not None and fam in expected and expected[fam] != len(names):
            raise FeatureError(f"dimension mismatch for {fam}: {len(names)} vs manifest "
                               f"{expected[fam]}")
        blocks.append((fam, group, pos, pos + len(names)))
        pos += len(names)
    X = np.empty((len(rows), pos))
    for i, row in enumerate(rows):
        if [(v.family, v.group, v.names) for v in row] != layout:
            raise FeatureError(f"row {i}: feature layout differs from row 0")
        X[i] = np.concatenate([v.values for v in row])
    names = tuple(n for _, _, ns in layout for n in ns)
    return Dataset(X, np.asarray(labels), names, tuple(blocks), tuple(subjects), tuple(keys))


@dataclass(frozen=True)
class MinMaxScaler:
    """Per-feature affine map to [0, 1] on the fitting rows; constant columns map to 0."""

    low: np.ndarray
    span: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "MinMaxScaler":
        X = np.asarray(X, dtype=np.float64)
        if X.shape[0] == 0:
            raise TrainingError("cannot fit normalization on zero rows")
        if not np.all(np.isfinite(X)):
            raise TrainingError("non-finite features")
        low = X.min(axis=0)
        span = X.max(axis=0) - low
        return cls(low, np.where(span > 0, span, 1.0))

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.low) / self.span


def encode_labels(y: Sequence) -> tuple[np.ndarray, tuple]:
    """Integer codes 0..K-1 over sorted distinct labels."""
    classes, codes = np.unique(np.asarray(y), return_inverse=True)
    return codes.astype(int), tuple(classes.tolist())
