"""Random forest regressor: bagged mean-leaf CART trees.

Each tree draws its own RNG stream from (seed, tree_index), so a forest is
a pure function of (X, y, spec, seed) regardless of how trees might be
scheduled. Predictions average the per-tree outputs.
"""

from __future__ import annotations

import numpy as np

from .specs import ForestSpec
from .tree import RegressionTree, fit_tree


class RandomForest:
    def __init__(self, spec: ForestSpec, trees: list[RegressionTree], n_features: int):
        self.spec = spec
        self.trees = trees
        self.n_features = n_features

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(
                f"expected (n, {self.n_features}) input, got {X.shape}"
            )
        total = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            total += tree.predict(X)
        return total / len(self.trees)

    def to_dict(self) -> dict:
        return {
            "n_features": self.n_features,
            "trees": [t.to_dict() for t in self.trees],
        }

    @classmethod
    def from_dict(cls, spec: ForestSpec, obj: dict) -> "RandomForest":
        trees = [RegressionTree.from_dict(t) for t in obj["trees"]]
        return cls(spec, trees, int(obj["n_features"]))


def fit_forest(X: np.ndarray, y: np.ndarray, spec: ForestSpec, seed: int = 0) -> RandomForest:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n, d = X.shape
    trees: list[RegressionTree] = []
    for t in range(spec.n_trees):
        rng = np.random.default_rng([seed, t])
        if spec.bootstrap:
            sample_idx = rng.integers(0, n, size=n).astype(np.int64)
        else:
            sample_idx = np.arange(n, dtype=np.int64)
        tree_seed = int(rng.integers(0, 2**31 - 1))
        trees.append(
            fit_tree(
                X,
                y,
                sample_idx=sample_idx,
                max_depth=spec.max_depth,
                min_samples_split=spec.min_samples_split,
                min_samples_leaf=spec.min_samples_leaf,
                max_features=spec.max_features,
                seed=tree_seed,
            )
        )
    return RandomForest(spec, trees, d)
