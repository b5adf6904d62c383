"""Fully connected regression network trained with mini-batch gradients.

Loss on a batch is ``mean((y - f(x))**2) + l2/2 * sum ||W||_F**2`` (biases
are not penalized).  Targets are standardized internally so the default
learning rate works for kcal/mol-scale data; predictions are returned in the
original units.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DivergenceError, ShapeError
from ..seeding import rng_for

ACTIVATIONS = ("relu", "tanh")
SOLVERS = ("adam", "sgd")


def _act(z, activation):
    if activation == "relu":
        return np.maximum(z, 0.0)
    return np.tanh(z)


def _act_grad(z, a, activation):
    if activation == "relu":
        return (z > 0).astype(float)
    return 1.0 - a**2


def forward(weights, biases, X, activation):
    """Returns the output column and the per-layer (pre, post) activations."""
    cache = []
    a = X
    last = len(weights) - 1
    for l, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W + b
        a = z if l == last else _act(z, activation)
        cache.append((z, a))
    return a[:, 0], cache


def loss_and_grad(weights, biases, X, y, activation="relu", l2=0.0):
    """Penalized MSE and its analytic gradient (lists matching ``weights``/``biases``)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    out, cache = forward(weights, biases, X, activation)
    resid = out - y
    loss = float(resid @ resid / n + 0.5 * l2 * sum((W**2).sum() for W in weights))
    gW = [None] * len(weights)
    gb = [None] * len(weights)
    delta = (2.0 / n) * resid[:, None]
    for l in range(len(weights) - 1, -1, -1):
        a_prev = X if l == 0 else cache[l - 1][1]
        gW[l] = a_prev.T @ delta + l2 * weights[l]
        gb[l] = delta.sum(axis=0)
        if l > 0:
            z_prev, a_prev_act = cache[l - 1]
            delta = (delta @ weights[l].T) * _act_grad(z_prev, a_prev_act, activation)
    return loss, gW, gb


@dataclass
class MLPModel:
    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "relu"
    l2: float = 0.0
    y_mean: float = 0.0
    y_scale: float = 1.0
    loss_trace: list[float] = field(default_factory=list)
    kind: str = "mlp"

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.size == 0:
            return np.zeros(0)
        if X.ndim != 2 or X.shape[1] != self.layer_sizes[0]:
            raise ShapeError(f"expected (n, {self.layer_sizes[0]}) features, got {X.shape}")
        out, _ = forward(self.weights, self.biases, X, self.activation)
        return out * self.y_scale + self.y_mean

    def to_dict(self) -> dict:
        return {
            "layer_sizes": list(self.layer_sizes),
            "weights": [W.tolist() for W in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "activation": self.activation, "l2": self.l2,
            "y_mean": self.y_mean, "y_scale": self.y_scale,
            "loss_trace": list(self.loss_trace),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MLPModel":
        return cls(
            layer_sizes=tuple(int(s) for s in d["layer_sizes"]),
            weights=[np.asarray(W, dtype=float).reshape(a, b) for W, (a, b) in
                     zip(d["weights"], zip(d["layer_sizes"][:-1], d["layer_sizes"][1:]))],
            biases=[np.asarray(b, dtype=float) for b in d["biases"]],
            activation=d["activation"], l2=float(d["l2"]),
            y_mean=float(d["y_mean"]), y_scale=float(d["y_scale"]),
            loss_trace=[float(v) for v in d["loss_trace"]],
        )


def init_params(layer_sizes, activation, rng):
    weights, biases = [], []
    factor = 6.0
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = np.sqrt(factor / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return weights, biases


def mlp_fit(X, y, hidden=(64,), activation="relu", l2=1e-4, learning_rate=1e-3,
            epochs=200, batch_size=32, seed=0, solver="adam",
            standardize_targets=True) -> MLPModel:
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if activation not in ACTIVATIONS:
        raise ValueError(f"activation must be one of {ACTIVATIONS}")
    if solver not in SOLVERS:
        raise ValueError(f"solver must be one of {SOLVERS}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ShapeError(f"X {X.shape} and y {y.shape} disagree")
    n, d = X.shape
    if standardize_targets:
        y_mean = float(y.mean())
        y_scale = float(y.std()) or 1.0
    else:
        y_mean, y_scale = 0.0, 1.0
    ys = (y - y_mean) / y_scale
    sizes = (d, *[int(h) for h in hidden], 1)
    rng = rng_for(seed, "mlp")
    weights, biases = init_params(sizes, activation, rng)
    params = weights + biases
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    b1, b2, eps = 0.9, 0.999, 1e-8
    step = 0
    bs = max(1, min(int(batch_size), n))
    trace = []
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            _, gW, gb = loss_and_grad(weights, biases, X[idx], ys[idx], activation, l2)
            grads = gW + gb
            step += 1
            for k, (p, g) in enumerate(zip(params, grads)):
                if solver == "adam":
                    m[k] = b1 * m[k] + (1 - b1) * g
                    v[k] = b2 * v[k] + (1 - b2) * g * g
                    mh = m[k] / (1 - b1**step)
                    vh = v[k] / (1 - b2**step)
                    p -= learning_rate * mh / (np.sqrt(vh) + eps)
                else:
                    p -= learning_rate * g
        loss, _, _ = loss_and_grad(weights, biases, X, ys, activation, l2)
        if not np.isfinite(loss):
            raise DivergenceError(epoch)
        trace.append(loss)
    return MLPModel(sizes, weights, biases, activation, float(l2), y_mean, y_scale, trace)


def mlp_predict(model: MLPModel, X) -> np.ndarray:
    return model.predict(X)
