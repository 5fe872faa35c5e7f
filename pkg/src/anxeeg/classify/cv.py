"""Stratified k-fold cross-validation with train-only normalization."""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from anxeeg.classify.dataset import MinMaxScaler
from anxeeg.classify.knn import KnnModel
from anxeeg.classify.ssae import SsaeConfig, ssae_train
from anxeeg.classify.svm import svm_train
from anxeeg.errors import TrainingError
from anxeeg.rng import stage_rng

CLASSIFIERS = ("knn", "svm", "ssae", "majority")


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in CLASSIFIERS:
            raise TrainingError(f"unknown classifier {self.kind!r}")

    def fingerprint(self) -> dict:
        return {"kind": self.kind, "params": dict(sorted(self.params.items()))}


class MajorityModel:
    def __init__(self, y: np.ndarray):
        classes, counts = np.unique(y, return_counts=True)
        self.label = classes[np.argmax(counts)]

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.full(np.atleast_2d(X).shape[0], self.label, dtype=object)


def fit_model(spec: ModelSpec, X: np.ndarray, y: np.ndarray, rng: np.random.Generator):
    p = spec.params
    if spec.kind == "knn":
        return KnnModel(X, y, int(p.get("k", 5)))
    if spec.kind == "svm":
        gamma = p.get("gamma")
        return svm_train(X, y, float(p.get("C", 1.0)), None if gamma is None else float(gamma))
    if spec.kind == "ssae":
        cfg = SsaeConfig(**{k: (tuple(v) if k == "sizes" and v is not None else v)
                            for k, v in p.items()})
        return ssae_train(X, y, cfg, rng)
    return MajorityModel(y)


def stratified_folds(y: Sequence, folds: int, rng: np.random.Generator) -> np.ndarray:
    """Fold index per sample: each class is shuffled and dealt round-robin.

    Dealing continues where the previous class stopped so fold sizes differ
    by at most one.
    """
    y = np.asarray(y)
    n = y.shape[0]
    if folds < 2:
        raise TrainingError("need at least 2 folds")
    if n < folds:
        raise TrainingError(f"fewer samples ({n}) than folds ({folds})")
    assign = np.empty(n, dtype=int)
    offset = 0
    classes, counts = np.unique(y, return_counts=True)
    if counts.min() < folds:
        warnings.warn(f"class with {counts.min()} samples < {folds} folds; stratification is "
                      "best-effort", RuntimeWarning, stacklevel=2)
    for c in classes:
        idx = np.flatnonzero(y == c)
        idx = idx[rng.permutation(idx.shape[0])]
        assign[idx] = (offset + np.arange(idx.shape[0])) % folds
        offset = (offset + idx.shape[0]) % folds
    return assign


def grouped_folds(groups: Sequence[str], folds: int, rng: np.random.Generator) -> np.ndarray:
    """Fold index per sample with every group (subject) confined to one fold."""
    groups = np.asarray(groups, dtype=object)
    uniq = sorted(set(groups.tolist()))
    if len(uniq) < folds:
        raise TrainingError(f"fewer groups ({len(uniq)}) than folds ({folds})")
    order = rng.permutation(len(uniq))
    fold_of = {uniq[g]: k % folds for k, g in enumerate(order)}
    return np.array([fold_of[g] for g in groups.tolist()], dtype=int)


@dataclass(frozen=True)
class CvReport:
    classes: tuple
    fold_accuracy: tuple[float, ...]
    fold_sizes: tuple[int, ...]
    confusion: np.ndarray
    fingerprint: dict

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracy))

    def to_rows(self) -> dict[str, Any]:
        return {
            "classes": [str(c) for c in self.classes],
            "fold_accuracy": list(self.fold_accuracy),
            "fold_sizes": list(self.fold_sizes),
            "mean_accuracy": self.mean_accuracy,
            "confusion": self.confusion.tolist(),
            "fingerprint": self.fingerprint,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_rows(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"classifier\t{self.fingerprint.get('model', {}).get('kind', '?')}",
                 f"fingerprint\t{fingerprint_hash(self.fingerprint)}"]
        for k, (a, n) in enumerate(zip(self.fold_accuracy, self.fold_sizes)):
            lines.append(f"fold {k + 1}\t{a:.4f}\t(n={n})")
        lines.append(f"mean\t{self.mean_accuracy:.4f}")
        lines.append("confusion (rows = true)\t" + "\t".join(str(c) for c in self.classes))
        for c, row in zip(self.classes, self.confusion):
            lines.append(f"{c}\t" + "\t".join(str(int(v)) for v in row))
        return "\n".join(lines) + "\n"


def fingerprint_hash(obj: Any) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def cross_validate(X: np.ndarray, y: Sequence, spec: ModelSpec, folds: int = 5, seed: int = 0,
                   groups: Sequence[str] | None = None, split: str = "stratified",
                   extra: dict | None = None) -> CvReport:
    """k-fold accuracy; the min-max scaler is fitted on each training split only.

    ``split`` is ``stratified`` (default) or ``subject`` (requires ``groups``).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.shape[0] != y.shape[0]:
        raise TrainingError("row/label count mismatch")
    split_rng = stage_rng(seed, "evaluate", 0)
    if split == "stratified":
        assign = stratified_folds(y, folds, split_rng)
    elif split == "subject":
        if groups is None:
            raise TrainingError("subject-grouped folds need subject tags")
        assign = grouped_folds(groups, folds, split_rng)
    else:
        raise TrainingError(f"unknown split {split!r}")
    classes = tuple(np.unique(y).tolist())
    index = {c: i for i, c in enumerate(classes)}
    confusion = np.zeros((len(classes), len(classes)), dtype=int)
    accs, sizes = [], []
    for k in range(folds):
        test = assign == k
        train = ~test
        if not test.any():
            raise TrainingError(f"fold {k + 1} is empty")
        scaler = MinMaxScaler.fit(X[train])
        model = fit_model(spec, scaler.transform(X[train]), y[train],
                          stage_rng(seed, "train", k + 1))
        pred = model.predict(scaler.transform(X[test]))
        truth = y[test]
        accs.append(float(np.mean([p == t for p, t in zip(pred.tolist(), truth.tolist())])))
        sizes.append(int(test.sum()))
        for p, t in zip(pred.tolist(), truth.tolist()):
            confusion[index[t], index[p]] += 1
    fp = {"model": spec.fingerprint(), "folds": folds, "seed": int(seed), "split": split,
          "normalization": "minmax fitted on training folds", "n_samples": int(X.shape[0]),
          "n_features": int(X.shape[1])}
    if extra:
        fp.update(extra)
    return CvReport(classes, tuple(accs), tuple(sizes), confusion, fp)


def spec_from_dict(d: dict) -> ModelSpec:
    d = dict(d)
    return ModelSpec(d.pop("kind"), d)


__all__ = ["ModelSpec", "CvReport", "cross_validate", "stratified_folds", "grouped_folds",
           "fit_model", "fingerprint_hash"]
