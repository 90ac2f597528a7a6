from __future__ import annotations

import numpy as np

from ..errors import HyperparameterError
from .base import Classifier


class LinearSvmClassifier(Classifier):
    """One-vs-rest linear SVM trained by stochastic subgradient descent on the hinge loss.

    Minimises ``lam/2 |w|^2 + mean(max(0, 1 - y (w.x + b)))`` for every class
    at once.  The step size follows ``1 / (lam * (t0 + t))`` with ``t0`` chosen
    so the first step is ``1 / sqrt(lam)``-scaled (the usual "optimal" SGD
    schedule).  Each epoch visits rows in a fresh permutation drawn from
    ``seed``; the bias is not regularised.
    """

    kind = "svm"

    def __init__(self, lam: float = 1e-4, epochs: int = 10, seed: int = 0):
        super().__init__()
        if not lam > 0:
            raise HyperparameterError(f"regularization lam must be positive, got {lam}")
        if int(epochs) != epochs or epochs < 1:
            raise HyperparameterError(f"epochs must be an integer >= 1, got {epochs}")
        self.lam = float(lam)
        self.epochs = int(epochs)
        self.seed = int(seed)

    def _fit(self, X, y):
        n, p = X.shape
        K = self.classes_.size
        Y = np.where(y[:, None] == np.arange(K)[None, :], 1.0, -1.0)
        lam = self.lam
        eta0 = np.sqrt(1.0 / np.sqrt(lam))
        t0 = 1.0 / (eta0 * lam)
        # W = scale * V keeps the per-step shrink O(1)
        V = np.zeros((K, p))
        scale = 1.0
        b = np.zeros(K)
        rng = np.random.default_rng(self.seed)
        t = 0
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                eta = 1.0 / (lam * (t0 + t))
                t += 1
                x, yi = X[i], Y[i]
                margin = yi * (scale * (V @ x) + b)
                scale *= 1.0 - eta * lam
                viol = margin < 1.0
                if viol.any():
                    step = eta * yi[viol]
                    V[viol] += (step / scale)[:, None] * x
                    b[viol] += step
                if scale < 1e-9:
                    V *= scale
                    scale = 1.0
        self.coef_ = V * scale
        self.intercept_ = b

    def decision_function(self, X) -> np.ndarray:
        X = self._check_predict(X)
        return X @ self.coef_.T + self.intercept_

    def _predict_index(self, X):
        return np.argmax(X @ self.coef_.T + self.intercept_, axis=1)

    def _state(self):
        return (
            {"lam": self.lam, "epochs": self.epochs, "seed": self.seed},
            {"coef": self.coef_, "intercept": self.intercept_},
        )

    def _load_arrays(self, arrays):
        self.coef_ = arrays["coef"]
        self.intercept_ = arrays["intercept"]
