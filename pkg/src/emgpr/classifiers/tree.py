from __future__ import annotations

import numpy as np

from ..errors import HyperparameterError
from .base import Classifier

_LEAF = -1


class DecisionTreeClassifier(Classifier):
    """CART classification tree grown on Gini impurity.

    Candidate thresholds are midpoints between adjacent distinct sorted
    values; rows with ``x <= threshold`` go left.  Among equally good splits
    the lower feature index wins, then the lower threshold.  A node becomes a
    leaf when it is pure, reaches ``max_depth``, or admits no split leaving
    ``min_samples_leaf`` rows on each side.
    """

    kind = "dt"

    def __init__(self, max_depth: int = 20, min_samples_leaf: int = 1):
        super().__init__()
        if int(max_depth) != max_depth or max_depth < 0:
            raise HyperparameterError(f"max_depth must be an integer >= 0, got {max_depth}")
        if int(min_samples_leaf) != min_samples_leaf or min_samples_leaf < 1:
            raise HyperparameterError(f"min_samples_leaf must be an integer >= 1, got {min_samples_leaf}")
        self.max_depth = int(max_depth)
        self.min_samples_leaf = int(min_samples_leaf)

    def _fit(self, X, y):
        K = self.classes_.size
        feature, threshold, left, right, value = [], [], [], [], []

        def new_node():
            for lst, v in ((feature, _LEAF), (threshold, 0.0), (left, _LEAF), (right, _LEAF), (value, 0)):
                lst.append(v)
            return len(feature) - 1

        root = new_node()
        stack = [(root, np.arange(X.shape[0]), 0)]
        while stack:
            node, idx, depth = stack.pop()
            counts = np.bincount(y[idx], minlength=K)
            value[node] = int(np.argmax(counts))
            if depth >= self.max_depth or np.count_nonzero(counts) == 1:
                continue
            split = self._best_split(X[idx], y[idx], K)
            if split is None:
                continue
            j, thr = split
            go_left = X[idx, j] <= thr
            feature[node], threshold[node] = j, thr
            left[node], right[node] = new_node(), new_node()
            # push right first so nodes are numbered depth-first, left to right
            stack.append((right[node], idx[~go_left], depth + 1))
            stack.append((left[node], idx[go_left], depth + 1))

        self.feature_ = np.array(feature, dtype=np.int64)
        self.threshold_ = np.array(threshold, dtype=np.float64)
        self.left_ = np.array(left, dtype=np.int64)
        self.right_ = np.array(right, dtype=np.int64)
        self.value_ = np.array(value, dtype=np.int64)

    def _best_split(self, X, y, K):
        n = X.shape[0]
        m = self.min_samples_leaf
        if n < 2 * m:
            return None
        onehot = np.zeros((n, K), dtype=np.int64)
        onehot[np.arange(n), y] = 1
        n_left = np.arange(1, n)
        n_right = n - n_left
        total = onehot.sum(axis=0)
        size_ok = (n_left >= m) & (n_right >= m)
        best_score, best = -np.inf, None
        for j in range(X.shape[1]):
            order = np.argsort(X[:, j], kind="stable")
            xs = X[order, j]
            valid = size_ok & (xs[:-1] < xs[1:])
            if not valid.any():
                continue
            cum = np.cumsum(onehot[order], axis=0)[:-1]
            right_counts = total - cum
            # maximising sum(c^2)/n per side == minimising weighted Gini
            score = (cum * cum).sum(axis=1) / n_left + (right_counts * right_counts).sum(axis=1) / n_right
            score = np.where(valid, score, -np.inf)
            i = int(np.argmax(score))
            if score[i] > best_score:
                lo, hi = xs[i], xs[i + 1]
                thr = lo + (hi - lo) / 2.0
                if not lo <= thr < hi:
                    thr = lo
                best_score, best = score[i], (j, float(thr))
        return best

    def apply(self, X) -> np.ndarray:
        """Leaf node id reached by each row."""
        return self._leaves(self._check_predict(X))

    def _predict_index(self, X):
        return self.value_[self._leaves(X)]

    def _leaves(self, X):
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            internal = self.feature_[node] != _LEAF
            if not internal.any():
                break
            r, nd = rows[internal], node[internal]
            go_left = X[r, self.feature_[nd]] <= self.threshold_[nd]
            node[internal] = np.where(go_left, self.left_[nd], self.right_[nd])
        return node

    @property
    def depth(self) -> int:
        depth = np.zeros(self.feature_.size, dtype=np.int64)
        for i in range(self.feature_.size):
            if self.feature_[i] != _LEAF:
                depth[self.left_[i]] = depth[self.right_[i]] = depth[i] + 1
        return int(depth.max())

    @property
    def n_leaves(self) -> int:
        return int((self.feature_ == _LEAF).sum())

    def _state(self):
        return (
            {"max_depth": self.max_depth, "min_samples_leaf": self.min_samples_leaf},
            {"feature": self.feature_, "threshold": self.threshold_, "left": self.left_,
             "right": self.right_, "value": self.value_},
        )

    def _load_arrays(self, arrays):
        self.feature_ = arrays["feature"]
        self.threshold_ = arrays["threshold"]
        self.left_ = arrays["left"]
        self.right_ = arrays["right"]
        self.value_ = arrays["value"]
