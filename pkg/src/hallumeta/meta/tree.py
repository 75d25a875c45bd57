"""CART regression trees on numpy arrays with a numba-compiled growth kernel.

Split criterion is sum-of-squared-error reduction in variance units:
gain = (sse_parent - sse_left - sse_right) / n_node.  Candidate thresholds
are midpoints between consecutive distinct sorted feature values; a sample
goes left when x <= threshold.  The search walks features in ascending
index order and thresholds in ascending value order, keeping a candidate
only on a strict improvement, so exact ties resolve to the lowest feature
index and then the lowest threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit


@njit(cache=True)
def _grow_kernel(
    X,
    y,
    idx,
    feat_ids,
    max_depth,
    min_samples_split,
    min_samples_leaf,
    min_child_weight,
    min_gain,
    mtry,
    seed,
):
    # Node arrays sized for the worst case: a binary tree over m samples
    # has at most 2m - 1 nodes.
    m_total = idx.shape[0]
    cap = 2 * m_total + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    leaf_sum = np.zeros(cap, dtype=np.float64)
    leaf_cnt = np.zeros(cap, dtype=np.float64)

    n_feats = feat_ids.shape[0]
    use_rng = mtry < n_feats
    if use_rng:
        np.random.seed(seed)
    pool = np.empty(n_feats, dtype=np.int64)
    chosen = np.empty(mtry, dtype=np.int64)

    samp = idx.copy()
    buf = np.empty(m_total, dtype=np.int64)

    # stack rows: node_id, start, end, depth
    stack = np.empty((cap, 4), dtype=np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = m_total
    stack[0, 3] = 0
    sp = 1
    n_nodes = 1

    while sp > 0:
        sp -= 1
        node = stack[sp, 0]
        start = stack[sp, 1]
        end = stack[sp, 2]
        depth = stack[sp, 3]
        m = end - start

        s = 0.0
        s2 = 0.0
        for i in range(start, end):
            v = y[samp[i]]
            s += v
            s2 += v * v
        leaf_sum[node] = s
        leaf_cnt[node] = m

        if m < min_samples_split:
            continue
        if max_depth >= 0 and depth >= max_depth:
            continue

        if use_rng:
            # partial Fisher-Yates: draw mtry distinct features, then sort
            # ascending so the tie-break order is index order
            for j in range(n_feats):
                pool[j] = j
            for j in range(mtry):
                k = j + np.random.randint(0, n_feats - j)
                tmp = pool[j]
                pool[j] = pool[k]
                pool[k] = tmp
                chosen[j] = pool[j]
            chosen[:mtry] = np.sort(chosen[:mtry])
            n_try = mtry
        else:
            n_try = n_feats

        sse_node = s2 - s * s / m
        best_gain = 0.0
        best_feat = -1
        best_thr = 0.0
        found = False

        vals = np.empty(m, dtype=np.float64)
        for t in range(n_try):
            if use_rng:
                col = feat_ids[chosen[t]]
            else:
                col = feat_ids[t]
            for i in range(m):
                vals[i] = X[samp[start + i], col]
            order = np.argsort(vals)
            # prefix scan over the sorted order: split after position p-1
            sum_l = 0.0
            sum2_l = 0.0
            for p in range(1, m):
                v_prev = vals[order[p - 1]]
                yv = y[samp[start + order[p - 1]]]
                sum_l += yv
                sum2_l += yv * yv
                v_next = vals[order[p]]
                if v_next <= v_prev:
                    continue
                thr = 0.5 * (v_prev + v_next)
                # guard against midpoint collapsing onto a neighbour, which
                # would break the x <= thr partition counts
                if thr <= v_prev or thr >= v_next:
                    continue
                n_l = p
                n_r = m - p
                if n_l < min_samples_leaf or n_r < min_samples_leaf:
                    continue
                if n_l < min_child_weight or n_r < min_child_weight:
                    continue
                sum_r = s - sum_l
                sum2_r = s2 - sum2_l
                sse_l = sum2_l - sum_l * sum_l / n_l
                sse_r = sum2_r - sum_r * sum_r / n_r
                gain = (sse_node - sse_l - sse_r) / m
                if gain > best_gain:
                    found = True
                    best_gain = gain
                    best_feat = col
                    best_thr = thr

        if not found or best_gain <= 0.0 or best_gain < min_gain:
            continue

        # stable partition of samp[start:end) into (x <= thr | x > thr)
        lo = start
        nb = 0
        for i in range(start, end):
            if X[samp[i], best_feat] <= best_thr:
                samp[lo] = samp[i]
                lo += 1
            else:
                buf[nb] = samp[i]
                nb += 1
        for i in range(nb):
            samp[lo + i] = buf[i]
        mid = lo

        feature[node] = best_feat
        threshold[node] = best_thr
        left_id = n_nodes
        right_id = n_nodes + 1
        n_nodes += 2
        left[node] = left_id
        right[node] = right_id
        # push right first so the left child is grown next (pre-order DFS)
        stack[sp, 0] = right_id
        stack[sp, 1] = mid
        stack[sp, 2] = end
        stack[sp, 3] = depth + 1
        sp += 1
        stack[sp, 0] = left_id
        stack[sp, 1] = start
        stack[sp, 2] = mid
        stack[sp, 3] = depth + 1
        sp += 1

    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes], leaf_sum[:n_nodes], leaf_cnt[:n_nodes]


@njit(cache=True)
def _predict_kernel(feature, threshold, left, right, value, X):
    n = X.shape[0]
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]
    return out


@dataclass
class RegressionTree:
    """Fitted tree: parallel node arrays, -1 in `feature` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    leaf_sum: np.ndarray
    leaf_cnt: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be 2-dimensional")
        return _predict_kernel(
            self.feature, self.threshold, self.left, self.right, self.value, X
        )

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "leaf_sum": self.leaf_sum.tolist(),
            "leaf_cnt": self.leaf_cnt.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "RegressionTree":
        return cls(
            feature=np.asarray(obj["feature"], dtype=np.int64),
            threshold=np.asarray(obj["threshold"], dtype=np.float64),
            left=np.asarray(obj["left"], dtype=np.int64),
            right=np.asarray(obj["right"], dtype=np.int64),
            value=np.asarray(obj["value"], dtype=np.float64),
            leaf_sum=np.asarray(obj["leaf_sum"], dtype=np.float64),
            leaf_cnt=np.asarray(obj["leaf_cnt"], dtype=np.float64),
        )


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    *,
    sample_idx: np.ndarray | None = None,
    feat_ids: np.ndarray | None = None,
    max_depth: int | None = None,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
    min_child_weight: float = 0.0,
    min_gain: float = 0.0,
    mtry: int | None = None,
    seed: int = 0,
) -> tuple[np.ndarray, ...]:
    """Run the growth kernel; returns raw node arrays without leaf values."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (n, d) and y (n,) with matching n")
    if X.shape[0] < 1:
        raise ValueError("cannot grow a tree on zero samples")
    if sample_idx is None:
        sample_idx = np.arange(X.shape[0], dtype=np.int64)
    else:
        sample_idx = np.ascontiguousarray(sample_idx, dtype=np.int64)
    if feat_ids is None:
        feat_ids = np.arange(X.shape[1], dtype=np.int64)
    else:
        feat_ids = np.ascontiguousarray(feat_ids, dtype=np.int64)
    if mtry is None:
        mtry = feat_ids.shape[0]
    mtry = min(max(1, int(mtry)), feat_ids.shape[0])
    depth_arg = -1 if max_depth is None else int(max_depth)
    return _grow_kernel(
        X,
        y,
        sample_idx,
        feat_ids,
        depth_arg,
        int(min_samples_split),
        int(min_samples_leaf),
        float(min_child_weight),
        float(min_gain),
        mtry,
        int(seed),
    )


def resolve_mtry(max_features: str, n_features: int) -> int:
    """'auto' considers every feature; 'sqrt' considers ceil(sqrt(d))."""
    if max_features == "auto":
        return n_features
    if max_features == "sqrt":
        return int(np.ceil(np.sqrt(n_features)))
    raise ValueError(f"unknown max_features {max_features!r}")


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    *,
    sample_idx: np.ndarray | None = None,
    max_depth: int | None = None,
    min_samples_split: int = 2,
    min_samples_leaf: int = 1,
    max_features: str = "auto",
    seed: int = 0,
) -> RegressionTree:
    """Fit a mean-leaf regression tree."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    mtry = resolve_mtry(max_features, X.shape[1])
    feature, threshold, left, right, leaf_sum, leaf_cnt = grow_tree(
        X,
        y,
        sample_idx=sample_idx,
        max_depth=max_depth,
        min_samples_split=min_samples_split,
        min_samples_leaf=min_samples_leaf,
        mtry=mtry,
        seed=seed,
    )
    value = np.where(leaf_cnt > 0, leaf_sum / np.maximum(leaf_cnt, 1.0), 0.0)
    return RegressionTree(feature, threshold, left, right, value, leaf_sum, leaf_cnt)
