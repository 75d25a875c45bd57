"""Small fully-connected regressor trained with mini-batch SGD.

Float64 numpy throughout.  Hidden layers use relu or tanh, the single
output unit is a sigmoid so predictions live in (0, 1).  The training
objective is mean squared error plus l2_reg * sum of squared weights
(biases are not penalized).  Dropout is the inverted kind: activations
are masked and rescaled by 1/keep during training only, so inference
needs no correction.  Every run is a pure function of (X, y, spec, seed).
"""

from __future__ import annotations

import numpy as np

from ..errors import NonFiniteLoss
from .specs import MlpSpec

_ACTIVATIONS = {
    "relu": (lambda z: np.maximum(z, 0.0), lambda z, a: (z > 0.0).astype(np.float64)),
    "tanh": (np.tanh, lambda z, a: 1.0 - a * a),
}


def init_params(spec: MlpSpec, n_features: int, rng: np.random.Generator):
    sizes = [n_features] + [w for w, _ in spec.hidden_layers] + [1]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        scale = np.sqrt(1.0 / fan_in)
        weights.append(rng.normal(0.0, scale, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out, dtype=np.float64))
    return weights, biases


def loss_and_grads(
    weights: list[np.ndarray],
    biases: list[np.ndarray],
    activations: list[str],
    X: np.ndarray,
    y: np.ndarray,
    l2_reg: float,
    dropout_masks: list[np.ndarray] | None = None,
):
    """MSE + L2 loss and its exact gradients for one batch.

    dropout_masks, when given, holds one pre-scaled mask per hidden layer
    (entries 0 or 1/keep); None runs the deterministic inference path.
    """
    n = X.shape[0]
    a = X
    pre: list[np.ndarray] = []
    post: list[np.ndarray] = [X]
    for layer, act_name in enumerate(activations):
        z = a @ weights[layer] + biases[layer]
        fwd, _ = _ACTIVATIONS[act_name]
        a = fwd(z)
        if dropout_masks is not None:
            a = a * dropout_masks[layer]
        pre.append(z)
        post.append(a)
    z_out = a @ weights[-1] + biases[-1]
    pred = 1.0 / (1.0 + np.exp(-z_out[:, 0]))

    err = pred - y
    loss = float(np.mean(err**2))
    for w in weights:
        loss += l2_reg * float(np.sum(w * w))

    # backward
    d_pred = 2.0 * err / n
    delta = (d_pred * pred * (1.0 - pred))[:, None]
    grads_w = [np.empty(0)] * len(weights)
    grads_b = [np.empty(0)] * len(biases)
    grads_w[-1] = post[-1].T @ delta + 2.0 * l2_reg * weights[-1]
    grads_b[-1] = delta.sum(axis=0)
    for layer in range(len(activations) - 1, -1, -1):
        delta = delta @ weights[layer + 1].T
        if dropout_masks is not None:
            delta = delta * dropout_masks[layer]
        _, bwd = _ACTIVATIONS[activations[layer]]
        delta = delta * bwd(pre[layer], post[layer + 1])
        grads_w[layer] = post[layer].T @ delta + 2.0 * l2_reg * weights[layer]
        grads_b[layer] = delta.sum(axis=0)
    return loss, grads_w, grads_b


class Mlp:
    def __init__(self, spec: MlpSpec, weights, biases, n_features: int):
        self.spec = spec
        self.weights = weights
        self.biases = biases
        self.n_features = n_features

    @property
    def activations(self) -> list[str]:
        return [act for _, act in self.spec.hidden_layers]

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected (n, {self.n_features}) input, got {X.shape}")
        a = X
        for layer, act_name in enumerate(self.activations):
            fwd, _ = _ACTIVATIONS[act_name]
            a = fwd(a @ self.weights[layer] + self.biases[layer])
        z = a @ self.weights[-1] + self.biases[-1]
        return 1.0 / (1.0 + np.exp(-z[:, 0]))

    def to_dict(self) -> dict:
        return {
            "n_features": self.n_features,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, spec: MlpSpec, obj: dict) -> "Mlp":
        weights = [np.asarray(w, dtype=np.float64) for w in obj["weights"]]
        biases = [np.asarray(b, dtype=np.float64) for b in obj["biases"]]
        return cls(spec, weights, biases, int(obj["n_features"]))


def fit_mlp(X: np.ndarray, y: np.ndarray, spec: MlpSpec, seed: int = 0) -> Mlp:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n, d = X.shape
    rng = np.random.default_rng(seed)
    weights, biases = init_params(spec, d, rng)
    activations = [act for _, act in spec.hidden_layers]
    keep = 1.0 - spec.dropout
    for epoch in range(spec.epochs):
        order = rng.permutation(n)
        for batch_no, lo in enumerate(range(0, n, spec.batch_size)):
            take = order[lo : lo + spec.batch_size]
            xb, yb = X[take], y[take]
            masks = None
            if spec.dropout > 0.0 and activations:
                masks = [
                    (rng.random((xb.shape[0], w)) < keep).astype(np.float64) / keep
                    for w, _ in spec.hidden_layers
                ]
            loss, gw, gb = loss_and_grads(weights, biases, activations, xb, yb, spec.l2_reg, masks)
            if not np.isfinite(loss):
                raise NonFiniteLoss(epoch, batch_no, loss)
            for i in range(len(weights)):
                weights[i] -= spec.learning_rate * gw[i]
                biases[i] -= spec.learning_rate * gb[i]
    return Mlp(spec, weights, biases, d)
