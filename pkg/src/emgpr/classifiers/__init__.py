"""kNN, naive Bayes, decision tree and linear SVM behind one train/predict contract."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from ..errors import FormatError, HyperparameterError, SpecError
from .base import Classifier
from .knn import KnnClassifier
from .naive_bayes import GaussianNbClassifier
from .standardize import StandardizationParams, apply_standardizer, fit_standardizer
from .svm import LinearSvmClassifier
from .tree import DecisionTreeClassifier

CLASSIFIERS = {
    "knn": KnnClassifier,
    "nb": GaussianNbClassifier,
    "dt": DecisionTreeClassifier,
    "svm": LinearSvmClassifier,
}

# standardize by default for everything except the order-based tree
DEFAULT_STANDARDIZE = {"knn": True, "nb": True, "dt": False, "svm": True}

MODEL_FORMAT = "emgpr-model"
MODEL_VERSION = 1


def get_classifier(kind: str, **hyperparams) -> Classifier:
    try:
        cls = CLASSIFIERS[kind.lower()]
    except KeyError:
        raise SpecError(f"unknown classifier {kind!r}; choose from {', '.join(CLASSIFIERS)}") from None
    try:
        return cls(**hyperparams)
    except TypeError as exc:
        raise HyperparameterError(f"{kind}: {exc}") from None


def train(kind: str, data, labels=None, **hyperparams) -> Classifier:
    """Fit a classifier of ``kind`` on a FeatureMatrix (or an array plus ``labels``)."""
    if labels is None:
        X, y = data.values, data.labels
    else:
        X, y = data, labels
    return get_classifier(kind, **hyperparams).fit(X, y)


def predict(model: Classifier, rows) -> np.ndarray:
    return model.predict(getattr(rows, "values", rows))


def save_model(model: Classifier, path: Union[str, Path]) -> None:
    """Write a single self-describing ``.npz`` file.

    Member ``__header__`` is a JSON string with the format tag, version,
    model kind and scalar hyperparameters; every other member is one named
    parameter array.  No pickled objects are stored.
    """
    params, arrays = model.get_state()
    header = {"format": MODEL_FORMAT, "version": MODEL_VERSION, "kind": model.kind, "params": params}
    with open(path, "wb") as fh:
        np.savez(fh, __header__=np.array(json.dumps(header, sort_keys=True)), **arrays)


def read_npz_header(path: Union[str, Path], expected_format: str):
    try:
        data = np.load(path, allow_pickle=False)
    except ValueError:
        raise FormatError(f"{path}: not an {expected_format} file (unreadable archive)") from None
    if not isinstance(data, np.lib.npyio.NpzFile) or "__header__" not in data.files:
        raise FormatError(f"{path}: not an {expected_format} file (no header)")
    try:
        header = json.loads(str(data["__header__"]))
    except ValueError:
        raise FormatError(f"{path}: corrupt header") from None
    if not isinstance(header, dict) or header.get("format") != expected_format:
        tag = header.get("format") if isinstance(header, dict) else None
        raise FormatError(f"{path}: format tag {tag!r}, expected {expected_format!r}")
    return header, data


def load_model(path: Union[str, Path]) -> Classifier:
    header, data = read_npz_header(path, MODEL_FORMAT)
    if header.get("version") != MODEL_VERSION:
        raise FormatError(f"{path}: unsupported model version {header.get('version')}")
    if header.get("kind") not in CLASSIFIERS:
        raise FormatError(f"{path}: unknown model kind {header.get('kind')!r}")
    cls = CLASSIFIERS[header["kind"]]
    arrays = {k: data[k] for k in data.files if k != "__header__"}
    return cls.from_state(header["params"], arrays)


__all__ = [
    "CLASSIFIERS",
    "Classifier",
    "DecisionTreeClassifier",
    "DEFAULT_STANDARDIZE",
    "GaussianNbClassifier",
    "KnnClassifier",
    "LinearSvmClassifier",
    "StandardizationParams",
    "apply_standardizer",
    "fit_standardizer",
    "get_classifier",
    "load_model",
    "predict",
    "save_model",
    "train",
]
