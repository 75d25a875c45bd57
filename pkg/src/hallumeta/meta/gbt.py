"""Gradient-boosted regression trees with squared-error loss.

The ensemble starts from the training-mean constant model and adds trees
fit to the current residuals.  Leaf outputs are shrunk twice: an L1 soft
threshold on the residual sum (reg_alpha) and an L2 count offset in the
denominator (reg_lambda), then scaled by the learning rate:

    leaf = lr * soft(sum_residuals, reg_alpha) / (count + reg_lambda)

A split is kept only when its variance-units gain clears both zero and
gamma; min_child_weight bounds child sample counts (unit hessians).
"""

from __future__ import annotations

import math

import numpy as np

from .specs import GbtSpec
from .tree import RegressionTree, grow_tree


def soft_threshold(value: float, alpha: float) -> float:
    if value > alpha:
        return value - alpha
    if value < -alpha:
        return value + alpha
    return 0.0


class GradientBoosting:
    def __init__(self, spec: GbtSpec, base: float, trees: list[RegressionTree], n_features: int):
        self.spec = spec
        self.base = base
        self.trees = trees
        self.n_features = n_features

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected (n, {self.n_features}) input, got {X.shape}")
        out = np.full(X.shape[0], self.base, dtype=np.float64)
        for tree in self.trees:
            out += tree.predict(X)
        return out

    def staged_predict(self, X):
        """Yield predictions after round 0 (base model), 1, ..., n_rounds."""
        X = np.ascontiguousarray(X, dtype=np.float64)
        out = np.full(X.shape[0], self.base, dtype=np.float64)
        yield out.copy()
        for tree in self.trees:
            out += tree.predict(X)
            yield out.copy()

    def to_dict(self) -> dict:
        return {
            "base": self.base,
            "n_features": self.n_features,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, spec: GbtSpec, obj: dict) -> "GradientBoosting":
        trees = [RegressionTree.from_dict(t) for t in obj["trees"]]
        return cls(spec, float(obj["base"]), trees, int(obj["n_features"]))


def _leaf_values(spec: GbtSpec, leaf_sum: np.ndarray, leaf_cnt: np.ndarray) -> np.ndarray:
    value = np.zeros_like(leaf_sum)
    for i in range(leaf_sum.shape[0]):
        if leaf_cnt[i] > 0:
            shrunk = soft_threshold(leaf_sum[i], spec.reg_alpha)
            value[i] = spec.learning_rate * shrunk / (leaf_cnt[i] + spec.reg_lambda)
    return value


def fit_gbt(X: np.ndarray, y: np.ndarray, spec: GbtSpec, seed: int = 0) -> GradientBoosting:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n, d = X.shape
    base = float(np.mean(y))
    current = np.full(n, base, dtype=np.float64)
    trees: list[RegressionTree] = []
    for t in range(spec.n_rounds):
        rng = np.random.default_rng([seed, t])
        if spec.subsample < 1.0:
            m = max(1, int(math.floor(spec.subsample * n)))
            sample_idx = np.sort(rng.permutation(n)[:m]).astype(np.int64)
        else:
            sample_idx = np.arange(n, dtype=np.int64)
        if spec.colsample_bytree < 1.0:
            k = max(1, int(math.floor(spec.colsample_bytree * d)))
            feat_ids = np.sort(rng.permutation(d)[:k]).astype(np.int64)
        else:
            feat_ids = np.arange(d, dtype=np.int64)
        residual = y - current
        feature, threshold, left, right, leaf_sum, leaf_cnt = grow_tree(
            X,
            residual,
            sample_idx=sample_idx,
            feat_ids=feat_ids,
            max_depth=spec.max_depth,
            min_samples_split=2,
            min_samples_leaf=1,
            min_child_weight=spec.min_child_weight,
            min_gain=spec.gamma,
        )
        value = _leaf_values(spec, leaf_sum, leaf_cnt)
        tree = RegressionTree(feature, threshold, left, right, value, leaf_sum, leaf_cnt)
        current += tree.predict(X)
        trees.append(tree)
    return GradientBoosting(spec, base, trees, d)
