"""Independent reference implementations used only by the test suite.

Written for clarity over speed: plain loops, no shared code with the package.
"""

from __future__ import annotations

import math

import numpy as np


def hjorth_direct(x):
    """Literal moment ratios by explicit summation."""
    x = [float(v) for v in x]
    n = len(x)
    dx = [x[i + 1] - x[i] for i in range(n - 1)]
    ddx = [dx[i + 1] - dx[i] for i in range(n - 2)]
    m0 = math.fsum(v * v for v in x) / n
    m1 = math.fsum(v * v for v in dx) / (n - 1)
    m2 = math.fsum(v * v for v in ddx) / (n - 2)
    mobility = m1 / m0
    return m0, mobility, math.sqrt(max(m2 / m1 - mobility, 0.0))


def higuchi_direct(x, k_max):
    """Curve lengths over every offset, then the log-log slope by normal equations."""
    x = [float(v) for v in x]
    n = len(x)
    logs_k, logs_l = [], []
    for k in range(1, k_max + 1):
        total = 0.0
        for m in range(1, k + 1):
            count = (n - m) // k
            s = 0.0
            for i in range(1, count + 1):
                s += abs(x[m - 1 + i * k] - x[m - 1 + (i - 1) * k])
            total += s * (n - 1) / (count * k) / k
        logs_k.append(math.log(k))
        logs_l.append(math.log(total / k))
    mk = sum(logs_k) / k_max
    ml = sum(logs_l) / k_max
    num = sum((a - mk) * (b - ml) for a, b in zip(logs_k, logs_l))
    den = sum((a - mk) ** 2 for a in logs_k)
    return -num / den


def knn_brute(X, y, q, k):
    """Majority of the k nearest; ties by summed distance, then first-seen label."""
    dist = [math.sqrt(sum((a - b) ** 2 for a, b in zip(row, q))) for row in X]
    order = sorted(range(len(X)), key=lambda i: (dist[i], i))[:k]
    tally: dict = {}
    seen = []
    for i in order:
        lab = y[i]
        if lab not in tally:
            tally[lab] = [0, 0.0]
            seen.append(lab)
        tally[lab][0] += 1
        tally[lab][1] += dist[i]
    return min(seen, key=lambda lab: (-tally[lab][0], tally[lab][1], seen.index(lab)))


def _project(v, y, C):
    """Euclidean projection onto {0 <= a <= C, y'a = 0} by bisection on the multiplier."""
    bound = np.max(np.abs(v)) + C
    lo, hi = -bound, bound
    for _ in range(60):
        mu = 0.5 * (lo + hi)
        if y @ np.clip(v - mu * y, 0.0, C) > 0:
            lo = mu
        else:
            hi = mu
    return np.clip(v - 0.5 * (lo + hi) * y, 0.0, C)


def svm_dual_qp(X, y, C, gamma, iters=1000):
    """Accelerated projected gradient on the dense SVM dual; returns (alpha, objective)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    sq = np.sum(X * X, axis=1)
    K = np.exp(-gamma * np.maximum(sq[:, None] + sq[None, :] - 2 * X @ X.T, 0.0))
    Q = np.outer(y, y) * K
    step = 1.0 / np.linalg.eigvalsh(Q).max()
    a = np.zeros(len(y))
    z, t = a.copy(), 1.0
    for _ in range(iters):
        a_new = _project(z - step * (Q @ z - 1.0), y, C)
        t_new = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
        z = a_new + (t - 1) / t_new * (a_new - a)
        a, t = a_new, t_new
    return a, 0.5 * a @ Q @ a - a.sum()


def central_difference(f, params, eps=1e-6):
    """Numerical gradient of scalar ``f`` with respect to each array in ``params`` (in place)."""
    grads = []
    for p in params:
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + eps
            up = f()
            p[idx] = old - eps
            down = f()
            p[idx] = old
            g[idx] = (up - down) / (2 * eps)
        grads.append(g)
    return grads
