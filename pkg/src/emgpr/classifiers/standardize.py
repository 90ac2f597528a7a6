from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInputError, ShapeError


@dataclass(frozen=True, eq=False)
class StandardizationParams:
    """Per-column mean and std learned from training rows only."""

    mean: np.ndarray
    std: np.ndarray
    epsilon: float = 1e-12

    def apply(self, X) -> np.ndarray:
        return apply_standardizer(self, X)


def fit_standardizer(train, epsilon: float = 1e-12) -> StandardizationParams:
    """Column statistics of ``train`` (a FeatureMatrix or 2-D array).

    Population std is used.  Columns whose std falls below ``epsilon`` get a
    unit divisor and their exact constant as mean, so they standardize to
    zeros on the training set and stay finite on new data.
    """
    X = np.asarray(getattr(train, "values", train), dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInputError(f"need a nonempty 2-D training matrix, got shape {X.shape}")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    flat = std < epsilon
    constant = X.min(axis=0) == X.max(axis=0)
    mean = np.where(constant, X[0], mean)
    std = np.where(flat, 1.0, std)
    return StandardizationParams(mean, std, epsilon)


def apply_standardizer(params: StandardizationParams, matrix):
    """Standardize an array or FeatureMatrix with stored parameters.

    A FeatureMatrix input returns a FeatureMatrix with the same metadata.
    """
    values = getattr(matrix, "values", matrix)
    X = np.asarray(values, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.mean.size:
        raise ShapeError(f"standardizer expects {params.mean.size} columns, got shape {X.shape}")
    Z = (X - params.mean) / params.std
    if hasattr(matrix, "values"):
        from ..features import FeatureMatrix

        return FeatureMatrix(Z, list(matrix.column_meta), matrix.labels, matrix.repetitions, matrix.subject_id)
    return Z
