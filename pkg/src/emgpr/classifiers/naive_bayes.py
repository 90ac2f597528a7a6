from __future__ import annotations

import numpy as np

from ..errors import HyperparameterError
from .base import Classifier


class GaussianNbClassifier(Classifier):
    """Gaussian naive Bayes scored with summed log densities.

    Every per-class variance is inflated by ``var_smoothing`` times the
    largest feature variance of the whole training set.
    """

    kind = "nb"

    def __init__(self, var_smoothing: float = 1e-9):
        super().__init__()
        if not var_smoothing >= 0:
            raise HyperparameterError("var_smoothing must be nonnegative")
        self.var_smoothing = float(var_smoothing)

    def _fit(self, X, y):
        K = self.classes_.size
        eps = self.var_smoothing * float(X.var(axis=0).max())
        if eps <= 0:
            eps = 1e-12
        self.epsilon_ = eps
        counts = np.bincount(y, minlength=K)
        self.priors_ = counts / counts.sum()
        self.means_ = np.empty((K, X.shape[1]))
        self.vars_ = np.empty((K, X.shape[1]))
        for c in range(K):
            Xc = X[y == c]
            self.means_[c] = Xc.mean(axis=0)
            self.vars_[c] = Xc.var(axis=0) + eps

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = self._check_predict(X)
        return self._jll(X)

    def _jll(self, X):
        K = self.classes_.size
        out = np.empty((X.shape[0], K))
        for c in range(K):
            norm = -0.5 * np.sum(np.log(2.0 * np.pi * self.vars_[c]))
            quad = -0.5 * np.sum((X - self.means_[c]) ** 2 / self.vars_[c], axis=1)
            out[:, c] = np.log(self.priors_[c]) + norm + quad
        return out

    def _predict_index(self, X):
        # argmax returns the first maximum: ties go to the lower class
        return np.argmax(self._jll(X), axis=1)

    def _state(self):
        return (
            {"var_smoothing": self.var_smoothing},
            {"priors": self.priors_, "means": self.means_, "vars": self.vars_,
             "epsilon": np.array(self.epsilon_)},
        )

    def _load_arrays(self, arrays):
        self.priors_ = arrays["priors"]
        self.means_ = arrays["means"]
        self.vars_ = arrays["vars"]
        self.epsilon_ = float(arrays["epsilon"])
