"""Shared fit/predict plumbing for the from-scratch classifiers."""
from __future__ import annotations

from typing import Any, Dict, Tuple

import numpy as np

from ..errors import DegenerateDataError, FeatureInputError, ShapeError


class Classifier:
    """Base class: subclasses implement ``_fit`` and ``_predict_index``.

    Labels may be any integers; internally they are mapped to indices into
    the sorted ``classes_`` array, so "lower class index" means lower label.
    """

    kind: str = ""

    def __init__(self):
        self.classes_: np.ndarray | None = None
        self.n_features_: int | None = None

    def fit(self, X, y) -> "Classifier":
        X, y = _check_xy(X, y)
        classes, y_idx = np.unique(y, return_inverse=True)
        if classes.size < 2:
            raise DegenerateDataError(
                f"training data has a single class ({classes.tolist()}); need at least 2"
            )
        self.classes_ = classes
        self.n_features_ = X.shape[1]
        self._fit(X, y_idx.astype(np.int64))
        return self

    def predict(self, X) -> np.ndarray:
        X = self._check_predict(X)
        return self.classes_[self._predict_index(X)]

    def _check_predict(self, X) -> np.ndarray:
        if self.classes_ is None:
            raise RuntimeError(f"{type(self).__name__} is not fitted")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features_:
            raise ShapeError(f"expected rows of width {self.n_features_}, got shape {X.shape}")
        return X

    def _fit(self, X: np.ndarray, y: np.ndarray) -> None:
        raise NotImplementedError

    def _predict_index(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # persistence -----------------------------------------------------
    def get_state(self) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
        """(JSON-able hyperparameters, named arrays) that fully describe the model."""
        params, arrays = self._state()
        arrays = dict(arrays, classes=self.classes_)
        return dict(params, n_features=self.n_features_), arrays

    @classmethod
    def from_state(cls, params: Dict[str, Any], arrays: Dict[str, np.ndarray]) -> "Classifier":
        params = dict(params)
        n_features = params.pop("n_features")
        model = cls(**params)
        model.classes_ = arrays["classes"]
        model.n_features_ = n_features
        model._load_arrays(arrays)
        return model

    def _state(self):
        raise NotImplementedError

    def _load_arrays(self, arrays: Dict[str, np.ndarray]) -> None:
        raise NotImplementedError


def _check_xy(X, y) -> Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2:
        raise ShapeError(f"training matrix must be 2-D, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise ShapeError(f"{X.shape[0]} rows but {y.shape} labels")
    if X.shape[0] == 0:
        raise DegenerateDataError("empty training set")
    if not np.all(np.isfinite(X)):
        raise FeatureInputError("training rows contain non-finite values")
    return X, y
