"""EMG pattern recognition with overlapped analysis windows.

Segment multi-channel sEMG into analysis windows, compute time-domain
features (configurations C1-C7), train one of four classifiers and score
per-subject accuracy.
"""
from .dataset import (
    Recording,
    SplitSpec,
    SyntheticSpec,
    generate_synthetic,
    load_recording,
    split_by_repetition,
    write_recording,
)
from .evaluation import (
    ConfusionMatrix,
    EvalReport,
    GroupSummary,
    accuracy,
    confusion,
    group_average,
)
from .features import (
    FeatureConfig,
    FeatureKind,
    FeatureMatrix,
    FeatureParams,
    build_matrix,
    extract,
    preset,
)
from .pipeline import TrainedPipeline, featurize_recording
from .windowing import (
    AggregationSpec,
    Segment,
    Technique,
    WindowSpec,
    aggregate,
    make_baseline_spec,
    segment,
)

__version__ = "0.1.0"
