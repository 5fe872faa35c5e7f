"""Stacked sparse autoencoder with a softmax head.

Each layer encodes ``h = s(W x + b)`` and decodes with the tied transpose,
``x' = s(W^T h + b')``. Pretraining minimises per layer

    J = 1/(2m) sum ||x' - x||^2 + lam/2 ||W||^2 + beta sum_j KL(rho || rho_j)

where ``rho_j`` is the mean activation of hidden unit ``j``. A softmax layer
is then fitted on the top codes and the encoder stack plus head is
fine-tuned on cross-entropy with weight decay. All training is full-batch
gradient descent; a step that would raise the loss by more than
``tolerance`` is halved until it does not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from anxeeg.errors import TrainingError


@dataclass(frozen=True)
class SsaeConfig:
    sizes: tuple[int, ...] | None = None
    rho: float = 0.05
    beta: float = 3.0
    lam: float = 1e-4
    step: float = 0.1
    pretrain_epochs: int = 400
    softmax_epochs: int = 400
    finetune_epochs: int = 200
    tolerance: float = 1e-6
    max_halvings: int = 30


def default_sizes(n_features: int) -> tuple[int, int]:
    """``L1 = floor(2d/3)``, ``L2 = ceil(3 L1 / 4)``, kept strictly decreasing."""
    if n_features < 3:
        raise TrainingError(f"{n_features} features is too few for a two-layer stack")
    l1 = (2 * n_features) // 3
    return l1, min(math.ceil(3 * l1 / 4), l1 - 1)


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class Layer:
    W: np.ndarray
    b: np.ndarray
    b_dec: np.ndarray

    def encode(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(X @ self.W.T + self.b)

    def decode(self, H: np.ndarray) -> np.ndarray:
        return sigmoid(H @ self.W + self.b_dec)


def init_layer(n_in: int, n_out: int, rng: np.random.Generator) -> Layer:
    r = math.sqrt(6.0 / (n_in + n_out + 1))
    return Layer(rng.uniform(-r, r, (n_out, n_in)), np.zeros(n_out), np.zeros(n_in))


def _kl(rho: float, rho_hat: np.ndarray) -> float:
    return float(np.sum(rho * np.log(rho / rho_hat) + (1 - rho) * np.log((1 - rho) / (1 - rho_hat))))


def autoencoder_loss(layer: Layer, X: np.ndarray, rho: float, beta: float,
                     lam: float) -> tuple[float, Layer]:
    """Loss and gradient (as a Layer of partial derivatives)."""
    m = X.shape[0]
    H = layer.encode(X)
    R = layer.decode(H)
    diff = R - X
    rho_hat = np.clip(H.mean(axis=0), 1e-12, 1 - 1e-12)
    loss = (0.5 / m) * float(np.sum(diff * diff)) + 0.5 * lam * float(np.sum(layer.W ** 2))
    loss += beta * _kl(rho, rho_hat)
    d_out = diff * R * (1 - R) / m
    sparse = beta * (-rho / rho_hat + (1 - rho) / (1 - rho_hat)) / m
    d_hid = (d_out @ layer.W.T + sparse) * H * (1 - H)
    gW = H.T @ d_out + d_hid.T @ X + lam * layer.W
    return loss, Layer(gW, d_hid.sum(axis=0), d_out.sum(axis=0))


@dataclass(frozen=True)
class Head:
    V: np.ndarray
    c: np.ndarray


def _one_hot(y: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((y.shape[0], k))
    out[np.arange(y.shape[0]), y] = 1.0
    return out


def softmax_loss(head: Head, Z: np.ndarray, Y: np.ndarray, lam: float) -> tuple[float, Head]:
    m = Z.shape[0]
    P = softmax(Z @ head.V.T + head.c)
    loss = -float(np.sum(Y * np.log(np.clip(P, 1e-300, None)))) / m
    loss += 0.5 * lam * float(np.sum(head.V ** 2))
    d = (P - Y) / m
    return loss, Head(d.T @ Z + lam * head.V, d.sum(axis=0))


def finetune_loss(layers: tuple[Layer, ...], head: Head, X: np.ndarray, Y: np.ndarray,
                  lam: float) -> tuple[float, tuple[tuple[Layer, ...], Head]]:
    """Cross-entropy of the full stack plus weight decay on every weight matrix."""
    acts = [X]
    for layer in layers:
        acts.append(layer.encode(acts[-1]))
    loss, g_head = softmax_loss(head, acts[-1], Y, lam)
    loss += 0.5 * lam * sum(float(np.sum(layer.W ** 2)) for layer in layers)
    m = X.shape[0]
    P = softmax(acts[-1] @ head.V.T + head.c)
    delta = ((P - Y) / m) @ head.V * acts[-1] * (1 - acts[-1])
    grads = []
    for li in range(len(layers) - 1, -1, -1):
        layer = layers[li]
        grads.append(Layer(delta.T @ acts[li] + lam * layer.W, delta.sum(axis=0),
                           np.zeros_like(layer.b_dec)))
        if li:
            delta = (delta @ layer.W) * acts[li] * (1 - acts[li])
    return loss, (tuple(reversed(grads)), g_head)


def _axpy(params, grads, step):
    """``params - step * grads`` over nested tuples of dataclasses/arrays."""
    if isinstance(params, np.ndarray):
        return params - step * grads
    if isinstance(params, tuple):
        return tuple(_axpy(p, g, step) for p, g in zip(params, grads))
    cls = type(params)
    return cls(**{k: _axpy(getattr(params, k), getattr(grads, k), step)
                  for k in params.__dataclass_fields__})


def descend(params, objective: Callable, epochs: int, cfg: SsaeConfig,
            stage: str) -> tuple[object, list[float]]:
    """Full-batch gradient descent with step halving; returns params and per-epoch loss."""
    loss, grad = objective(params)
    if not np.isfinite(loss):
        raise TrainingError(f"{stage}: loss is not finite at epoch 0")
    history = [loss]
    for epoch in range(1, epochs + 1):
        step = cfg.step
        accepted = False
        for _ in range(cfg.max_halvings + 1):
            cand = _axpy(params, grad, step)
            new_loss, new_grad = objective(cand)
            if np.isfinite(new_loss) and new_loss <= loss + cfg.tolerance:
                accepted = True
                break
            step *= 0.5
        if accepted:
            params, loss, grad = cand, new_loss, new_grad
        elif not np.isfinite(new_loss):
            raise TrainingError(f"{stage}: loss diverged (NaN) at epoch {epoch}")
        # Otherwise no step helps: stationary to working precision, keep params.
        history.append(loss)
    return params, history


@dataclass(frozen=True)
class SsaeModel:
    layers: tuple[Layer, ...]
    head: Head
    classes: tuple
    config: SsaeConfig
    history: dict = field(default_factory=dict, compare=False)

    def codes(self, X: np.ndarray) -> np.ndarray:
        A = np.asarray(X, dtype=np.float64)
        for layer in self.layers:
            A = layer.encode(A)
        return A

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return softmax(self.codes(np.atleast_2d(X)) @ self.head.V.T + self.head.c)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(self.classes, dtype=object)[np.argmax(self.predict_proba(X), axis=1)]


def ssae_train(X: np.ndarray, y: np.ndarray, cfg: SsaeConfig = SsaeConfig(),
               rng: np.random.Generator | None = None) -> SsaeModel:
    """Greedy layer-wise pretraining, softmax fit, then end-to-end fine-tuning."""
    X = np.asarray(X, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise TrainingError("non-finite features")
    rng = rng if rng is not None else np.random.default_rng(0)
    classes, codes = np.unique(np.asarray(y), return_inverse=True)
    if classes.shape[0] < 2:
        raise TrainingError("single-class training data")
    d = X.shape[1]
    sizes = tuple(cfg.sizes) if cfg.sizes else default_sizes(d)
    prev = d
    for s in sizes:
        if not 0 < s < prev:
            raise TrainingError(f"layer sizes {sizes} must strictly decrease below input size {d}")
        prev = s
    history: dict[str, list[float]] = {}
    layers = []
    A = X
    for li, size in enumerate(sizes):
        layer = init_layer(A.shape[1], size, rng)
        layer, hist = descend(layer, lambda p, A=A: autoencoder_loss(p, A, cfg.rho, cfg.beta, cfg.lam),
                              cfg.pretrain_epochs, cfg, f"pretrain layer {li + 1}")
        history[f"pretrain_{li + 1}"] = hist
        layers.append(layer)
        A = layer.encode(A)
    Y = _one_hot(codes, classes.shape[0])
    head = Head(0.005 * rng.standard_normal((classes.shape[0], sizes[-1])), np.zeros(classes.shape[0]))
    head, hist = descend(head, lambda p: softmax_loss(p, A, Y, cfg.lam), cfg.softmax_epochs, cfg,
                         "softmax")
    history["softmax"] = hist
    (layers_t, head), hist = descend(
        (tuple(layers), head), lambda p: finetune_loss(p[0], p[1], X, Y, cfg.lam),
        cfg.finetune_epochs, cfg, "fine-tune")
    history["finetune"] = hist
    return SsaeModel(tuple(layers_t), head, tuple(classes.tolist()), cfg, history)
