"""Recording -> feature matrix plumbing and the deployable TrainedPipeline."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from .classifiers import (
    CLASSIFIERS,
    DEFAULT_STANDARDIZE,
    Classifier,
    StandardizationParams,
    apply_standardizer,
    fit_standardizer,
    get_classifier,
    read_npz_header,
)
from .dataset import Recording
from .errors import FormatError, ShapeError
from .features import FeatureConfig, FeatureKind, FeatureMatrix, FeatureParams, build_matrix, extract_block
from .windowing import AggregationSpec, WindowSpec, iter_aggregate, segment

PIPELINE_FORMAT = "emgpr-pipeline"
PIPELINE_VERSION = 1


def featurize_recording(
    recording: Recording,
    window: WindowSpec,
    aggregation: Optional[AggregationSpec],
    config: FeatureConfig,
    include_rest: bool = False,
) -> FeatureMatrix:
    """Segment, optionally aggregate, and featurize one recording.

    Rest windows (label 0) are dropped unless ``include_rest``; in that case
    rest samples first inherit the preceding movement's repetition so the
    repetition split can place them.  Aggregation always runs over the full
    window stream, so groups never straddle a removed rest window.
    """
    if include_rest:
        recording = recording.with_rest_attached()
    segs = segment(recording, window)
    if aggregation is not None:
        stream = iter_aggregate(segs, aggregation)
    else:
        stream = iter(segs)
    if not include_rest:
        stream = (s for s in stream if s.label != 0)
    return build_matrix(stream, config, subject_id=recording.subject_id)


def select_config(matrix: FeatureMatrix, config: FeatureConfig) -> FeatureMatrix:
    """Columns of ``matrix`` belonging to ``config`` (matrix built from a superset)."""
    wanted = set(config.kinds)
    cols = [i for i, c in enumerate(matrix.column_meta) if c.kind in wanted]
    meta = [matrix.column_meta[i] for i in cols]
    num_channels = max(c.channel for c in matrix.column_meta) + 1
    if meta != config.column_meta(num_channels):
        raise ShapeError(f"matrix columns do not cover configuration {config.name}")
    return FeatureMatrix(
        matrix.values[:, cols], meta, matrix.labels, matrix.repetitions, matrix.subject_id
    )


def union_config(configs, params: Optional[FeatureParams] = None) -> FeatureConfig:
    kinds = {k for c in configs for k in c.kinds}
    return FeatureConfig("union", tuple(kinds), params or configs[0].params)


@dataclass(eq=False)
class TrainedPipeline:
    """Window spec, feature config, standardizer and classifier bound together."""

    window: WindowSpec
    aggregation: Optional[AggregationSpec]
    feature_config: FeatureConfig
    standardizer: Optional[StandardizationParams]
    model: Classifier
    num_channels: int
    sample_rate_hz: float = 2000.0
    include_rest: bool = False
    technique: str = ""
    n_train: int = 0

    def __post_init__(self):
        expected = self.feature_config.num_columns(self.num_channels)
        if self.model.n_features_ != expected:
            raise ShapeError(
                f"model expects {self.model.n_features_} features but {self.feature_config.name} "
                f"on {self.num_channels} channels gives {expected}"
            )

    @property
    def classes(self) -> np.ndarray:
        return self.model.classes_

    @classmethod
    def fit(
        cls,
        train: FeatureMatrix,
        classifier: str,
        window: WindowSpec,
        aggregation: Optional[AggregationSpec],
        feature_config: FeatureConfig,
        hyperparams: Optional[Dict[str, Any]] = None,
        standardize: Optional[bool] = None,
        sample_rate_hz: float = 2000.0,
        include_rest: bool = False,
        technique: str = "",
    ) -> "TrainedPipeline":
        if standardize is None:
            standardize = DEFAULT_STANDARDIZE[classifier]
        std = fit_standardizer(train) if standardize else None
        X = apply_standardizer(std, train.values) if std is not None else train.values
        model = get_classifier(classifier, **(hyperparams or {})).fit(X, train.labels)
        num_channels = max(c.channel for c in train.column_meta) + 1
        return cls(window, aggregation, feature_config, std, model, num_channels,
                   sample_rate_hz, include_rest, technique, len(train))

    def predict_rows(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(getattr(values, "values", values), dtype=np.float64)
        if self.standardizer is not None:
            values = apply_standardizer(self.standardizer, values)
        return self.model.predict(values)

    def predict_window(self, samples: np.ndarray):
        """Classify one raw (C, W) window: featurize, standardize, predict."""
        row = extract_block(np.asarray(samples)[None], self.feature_config)
        return self.predict_rows(row)[0]

    def featurize(self, recording: Recording) -> FeatureMatrix:
        return featurize_recording(
            recording, self.window, self.aggregation, self.feature_config, self.include_rest
        )

    # persistence ---------------------------------------------------------
    def save(self, path: Union[str, Path]) -> None:
        """Single ``.npz``: JSON ``__header__`` plus ``model.*`` / ``std.*`` arrays."""
        params, arrays = self.model.get_state()
        header = {
            "format": PIPELINE_FORMAT,
            "version": PIPELINE_VERSION,
            "window": {**dataclasses.asdict(self.window),
                       "mode": self.window.mode.value,
                       "label_policy": self.window.label_policy.value},
            "aggregation": dataclasses.asdict(self.aggregation) if self.aggregation else None,
            "feature_config": {
                "name": self.feature_config.name,
                "kinds": [k.value for k in self.feature_config.kinds],
                "params": dataclasses.asdict(self.feature_config.params),
            },
            "model": {"kind": self.model.kind, "params": params},
            "num_channels": self.num_channels,
            "sample_rate_hz": self.sample_rate_hz,
            "include_rest": self.include_rest,
            "standardized": self.standardizer is not None,
            "technique": self.technique,
            "n_train": self.n_train,
        }
        members = {f"model.{k}": v for k, v in arrays.items()}
        if self.standardizer is not None:
            members["std.mean"] = self.standardizer.mean
            members["std.std"] = self.standardizer.std
            header["std_epsilon"] = self.standardizer.epsilon
        with open(path, "wb") as fh:
            np.savez(fh, __header__=np.array(json.dumps(header, sort_keys=True)), **members)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "TrainedPipeline":
        header, data = read_npz_header(path, PIPELINE_FORMAT)
        if header.get("version") != PIPELINE_VERSION:
            raise FormatError(f"{path}: unsupported pipeline version {header.get('version')}")
        if header.get("model", {}).get("kind") not in CLASSIFIERS:
            raise FormatError(f"{path}: unknown model kind")
        model_cls = CLASSIFIERS[header["model"]["kind"]]
        arrays = {k[len("model."):]: data[k] for k in data.files if k.startswith("model.")}
        model = model_cls.from_state(header["model"]["params"], arrays)
        std = None
        if header["standardized"]:
            std = StandardizationParams(data["std.mean"], data["std.std"], header["std_epsilon"])
        fc = header["feature_config"]
        config = FeatureConfig(fc["name"], tuple(FeatureKind(k) for k in fc["kinds"]), FeatureParams(**fc["params"]))
        agg = AggregationSpec(**header["aggregation"]) if header["aggregation"] else None
        return cls(
            WindowSpec(**header["window"]), agg, config, std, model,
            header["num_channels"], header["sample_rate_hz"], header["include_rest"],
            header.get("technique", ""), header.get("n_train", 0),
        )
