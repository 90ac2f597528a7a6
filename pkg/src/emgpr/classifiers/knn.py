from __future__ import annotations

import numpy as np

from ..errors import HyperparameterError
from .base import Classifier

# query rows per distance block; keeps the block near 4M doubles
_BLOCK_ELEMS = 4_000_000


class KnnClassifier(Classifier):
    """Brute-force k-nearest neighbours with Euclidean distance.

    Ties are resolved deterministically: neighbours at equal distance are
    ordered by training-row index, and a vote tie goes to the tied class whose
    member appears first among the sorted neighbours.
    """

    kind = "knn"

    def __init__(self, k: int = 5):
        super().__init__()
        if int(k) != k or k < 1:
            raise HyperparameterError(f"k must be an integer >= 1, got {k}")
        self.k = int(k)

    def _fit(self, X, y):
        if self.k > X.shape[0]:
            raise HyperparameterError(f"k={self.k} exceeds the {X.shape[0]} training rows")
        self.X_ = np.ascontiguousarray(X)
        self.y_ = y
        self.sqnorm_ = np.einsum("ij,ij->i", X, X)

    def kneighbors(self, X) -> np.ndarray:
        """Indices of the k nearest training rows per query, nearest first."""
        X = self._check_predict(X)
        out = np.empty((X.shape[0], self.k), dtype=np.int64)
        n_train = self.X_.shape[0]
        step = max(1, _BLOCK_ELEMS // max(n_train, 1))
        for lo in range(0, X.shape[0], step):
            Q = X[lo:lo + step]
            qn = np.einsum("ij,ij->i", Q, Q)
            d2 = qn[:, None] + self.sqnorm_[None, :] - 2.0 * (Q @ self.X_.T)
            if self.k < n_train:
                kth = np.partition(d2, self.k - 1, axis=1)[:, self.k - 1]
            else:
                kth = d2.max(axis=1)
            # the expanded form is only used to shortlist; exact distances decide
            tol = 1e-7 * (qn + self.sqnorm_.max()) + 1e-300
            for r in range(Q.shape[0]):
                cand = np.flatnonzero(d2[r] <= kth[r] + tol[r])
                diff = self.X_[cand] - Q[r]
                exact = np.einsum("ij,ij->i", diff, diff)
                order = np.lexsort((cand, exact))[: self.k]
                out[lo + r] = cand[order]
        return out

    def _predict_index(self, X):
        nbrs = self.kneighbors(X)
        n_classes = self.classes_.size
        pred = np.empty(nbrs.shape[0], dtype=np.int64)
        for r, row in enumerate(nbrs):
            labs = self.y_[row]
            votes = np.bincount(labs, minlength=n_classes)
            top = votes.max()
            if (votes == top).sum() == 1:
                pred[r] = int(np.argmax(votes))
            else:
                pred[r] = int(labs[np.flatnonzero(votes[labs] == top)[0]])
        return pred

    def _state(self):
        return {"k": self.k}, {"X": self.X_, "y": self.y_}

    def _load_arrays(self, arrays):
        self.X_ = np.ascontiguousarray(arrays["X"], dtype=np.float64)
        self.y_ = np.asarray(arrays["y"], dtype=np.int64)
        self.sqnorm_ = np.einsum("ij,ij->i", self.X_, self.X_)
