"""RBF-kernel SVM trained by sequential minimal optimization, one-vs-one for multi-class.

The binary solver minimises the dual ``0.5 a'Qa - e'a`` subject to
``0 <= a <= C`` and ``y'a = 0`` with ``Q_ij = y_i y_j k(x_i, x_j)``. Working
pairs are chosen by maximal violation for the first index and the
second-order gain for the second (Fan, Chen and Lin, 2005).
"""

from __future__ import annotations

import warnings
from collections import OrderedDict
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from anxeeg.errors import TrainingError

TAU = 1e-12


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * A @ B.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


class _KernelColumns:
    """LRU cache of kernel matrix columns."""

    def __init__(self, X: np.ndarray, gamma: float, max_bytes: int = 256 * 2 ** 20):
        self.X = X
        self.gamma = gamma
        self.sq = np.sum(X * X, axis=1)
        self.cap = max(2, max_bytes // (8 * X.shape[0]))
        self.cols: OrderedDict[int, np.ndarray] = OrderedDict()

    def __getitem__(self, i: int) -> np.ndarray:
        col = self.cols.get(i)
        if col is not None:
            self.cols.move_to_end(i)
            return col
        d = self.sq + self.sq[i] - 2.0 * (self.X @ self.X[i])
        col = np.exp(-self.gamma * np.maximum(d, 0.0))
        col[i] = 1.0
        self.cols[i] = col
        if len(self.cols) > self.cap:
            self.cols.popitem(last=False)
        return col


@dataclass(frozen=True)
class SmoResult:
    alpha: np.ndarray
    rho: float
    objective: float
    violation: float
    iterations: int


def smo_solve(X: np.ndarray, y: np.ndarray, C: float = 1.0, gamma: float = 1.0,
              tol: float = 1e-3, max_iter: int | None = None) -> SmoResult:
    """Solve the binary dual for labels ``y`` in {-1, +1}."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    if C <= 0 or gamma <= 0:
        raise TrainingError("C and gamma must be positive")
    if not np.all(np.isfinite(X)):
        raise TrainingError("non-finite features")
    if set(np.unique(y)) != {-1.0, 1.0}:
        raise TrainingError("binary SVM needs both classes -1 and +1")
    max_iter = max_iter or max(100_000, 100 * n)
    K = _KernelColumns(X, gamma)
    alpha = np.zeros(n)
    G = -np.ones(n)
    it = 0
    gap = np.inf
    while it < max_iter:
        yG = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(yG[up])])
        g_max = yG[i]
        g_min = yG[low].min()
        gap = g_max - g_min
        if gap < tol:
            break
        Ki = K[i]
        cand = low & (yG < g_max)
        b = g_max - yG[cand]
        a = 2.0 - 2.0 * Ki[cand]
        a = np.where(a > 0, a, TAU)
        idx = np.flatnonzero(cand)
        j = int(idx[np.argmin(-(b * b) / a)])
        Kj = K[j]
        old_i, old_j = alpha[i], alpha[j]
        _update_pair(alpha, G, y, i, j, Ki[j], C)
        di, dj = alpha[i] - old_i, alpha[j] - old_j
        G += y * (Ki * (y[i] * di) + Kj * (y[j] * dj))
        it += 1
    if gap >= tol:
        warnings.warn(f"SMO stopped after {it} iterations with violation {gap:.3g}",
                      RuntimeWarning, stacklevel=2)
    rho = _rho(alpha, G, y, C)
    objective = 0.5 * float(alpha @ G) - 0.5 * float(alpha.sum())
    return SmoResult(alpha, rho, objective, float(max(gap, 0.0)) if np.isfinite(gap) else 0.0, it)


def _update_pair(alpha, G, y, i, j, Kij, C):
    """Analytic two-variable step with box clipping (LIBSVM's rules)."""
    quad_base = 2.0 - 2.0 * Kij
    quad = quad_base if quad_base > 0 else TAU
    ai, aj = alpha[i], alpha[j]
    if y[i] != y[j]:
        delta = (-G[i] - G[j]) / quad
        diff = ai - aj
        ai += delta
        aj += delta
        if diff > 0:
            if aj < 0:
                aj, ai = 0.0, diff
        else:
            if ai < 0:
                ai, aj = 0.0, -diff
        if diff > 0:
            if ai > C:
                ai, aj = C, C - diff
        else:
            if aj > C:
                aj, ai = C, C + diff
    else:
        delta = (G[i] - G[j]) / quad
        total = ai + aj
        ai -= delta
        aj += delta
        if total > C:
            if ai > C:
                ai, aj = C, total - C
        else:
            if aj < 0:
                aj, ai = 0.0, total
        if total > C:
            if aj > C:
                aj, ai = C, total - C
        else:
            if ai < 0:
                ai, aj = 0.0, total
    alpha[i], alpha[j] = ai, aj


def _rho(alpha, G, y, C) -> float:
    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(yG[free].mean())
    at_up = alpha >= C
    ub_mask = (at_up & (y < 0)) | (~at_up & (y > 0))
    lb_mask = (at_up & (y > 0)) | (~at_up & (y < 0))
    ub = yG[ub_mask].min() if ub_mask.any() else np.inf
    lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
    return float(0.5 * (ub + lb))


def dual_objective(alpha: np.ndarray, X: np.ndarray, y: np.ndarray, gamma: float) -> float:
    Q = (y[:, None] * y[None, :]) * rbf_kernel(X, X, gamma)
    return float(0.5 * alpha @ Q @ alpha - alpha.sum())


@dataclass(frozen=True)
class BinarySvm:
    """Decision ``sum_i coef_i k(s_i, u) + b`` with ``coef_i = alpha_i y_i``."""

    support_vectors: np.ndarray
    coef: np.ndarray
    bias: float
    gamma: float
    C: float
    objective: float = 0.0
    violation: float = 0.0

    def decision(self, U: np.ndarray) -> np.ndarray:
        U = np.atleast_2d(np.asarray(U, dtype=np.float64))
        if self.support_vectors.shape[0] == 0:
            return np.full(U.shape[0], self.bias)
        return rbf_kernel(U, self.support_vectors, self.gamma) @ self.coef + self.bias


def svm_train_binary(X, y, C: float = 1.0, gamma: float | None = None,
                     tol: float = 1e-3) -> BinarySvm:
    X = np.asarray(X, dtype=np.float64)
    gamma = gamma if gamma is not None else 1.0 / X.shape[1]
    res = smo_solve(X, y, C, gamma, tol)
    sv = res.alpha > 0
    return BinarySvm(X[sv], (res.alpha * np.asarray(y, dtype=np.float64))[sv], -res.rho,
                     gamma, C, res.objective, res.violation)


@dataclass(frozen=True)
class SvmModel:
    """One-vs-one ensemble. ``pairs[k] = (a, b, model)`` votes ``a`` on a positive decision."""

    classes: tuple
    pairs: tuple[tuple[int, int, BinarySvm], ...]

    def votes(self, U: np.ndarray) -> np.ndarray:
        U = np.atleast_2d(np.asarray(U, dtype=np.float64))
        v = np.zeros((U.shape[0], len(self.classes)), dtype=int)
        for a, b, m in self.pairs:
            pos = m.decision(U) > 0
            v[pos, a] += 1
            v[~pos, b] += 1
        return v

    def predict(self, U: np.ndarray) -> np.ndarray:
        # argmax takes the first (lowest-index) class on vote ties.
        return np.asarray(self.classes, dtype=object)[np.argmax(self.votes(U), axis=1)]


def svm_train(X, y, C: float = 1.0, gamma: float | None = None, tol: float = 1e-3) -> SvmModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.shape[0] != y.shape[0]:
        raise TrainingError("row/label count mismatch")
    if not np.all(np.isfinite(X)):
        raise TrainingError("non-finite features")
    classes = tuple(np.unique(y).tolist())
    if len(classes) < 2:
        raise TrainingError("single-class training data")
    gamma = gamma if gamma is not None else 1.0 / X.shape[1]
    pairs = []
    for a, b in combinations(range(len(classes)), 2):
        rows = (y == classes[a]) | (y == classes[b])
        yy = np.where(y[rows] == classes[a], 1.0, -1.0)
        pairs.append((a, b, svm_train_binary(X[rows], yy, C, gamma, tol)))
    return SvmModel(classes, tuple(pairs))
