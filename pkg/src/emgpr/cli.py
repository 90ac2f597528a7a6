"""Command-line entry point and end-to-end experiment orchestration.

Subcommands: ingest, synth, featurize, train, evaluate, run, bench, presets.
Exit codes: 0 success, 1 validation error, 2 data error, 3 internal error.

Any subcommand accepts ``--config-file PATH``: a flat text file of
``key = value`` lines (``#`` starts a comment, keys are flag names with
dashes or underscores).  Flags given on the command line override the file.
"""
from __future__ import annotations

import argparse
import contextlib
import dataclasses
import logging
import re
import shutil
import statistics
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .classifiers import CLASSIFIERS, DEFAULT_STANDARDIZE
from .dataset import (
    DEFAULT_RATE_HZ,
    Recording,
    SplitSpec,
    SyntheticSpec,
    generate_synthetic,
    load_recording,
    split_by_repetition,
    write_recording,
)
from .errors import DataError, EmgprError, SpecError, ValidationError
from .evaluation import (
    EvalReport,
    group_average,
    sort_reports,
    vote_by_trial,
    write_report_csv,
    write_summary_csv,
)
from .features import PRESETS, FeatureConfig, FeatureMatrix, FeatureParams, preset
from .pipeline import TrainedPipeline, featurize_recording, select_config, union_config
from .windowing import (
    LATENCY_LIMIT_MS,
    AggregationSpec,
    LabelPolicy,
    Technique,
    WindowSpec,
    make_baseline_spec,
    segment,
)

logger = logging.getLogger("emgpr")

EXIT_OK, EXIT_VALIDATION, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


@contextlib.contextmanager
def stage(name: str):
    """Tag any error escaping the block with the pipeline stage it came from."""
    try:
        yield
    except Exception as exc:
        if not hasattr(exc, "stage"):
            exc.stage = name
        raise


@dataclass
class RunConfig:
    inputs: List[Path] = field(default_factory=list)
    subjects: Optional[List[int]] = None
    synthetic: Optional[SyntheticSpec] = None
    synthetic_subjects: int = 1
    techniques: Tuple[str, ...] = ("PROPOSED",)
    configs: Tuple[str, ...] = ("C1",)
    classifiers: Tuple[str, ...] = ("knn",)
    hyperparams: Dict[str, dict] = field(default_factory=dict)
    split: SplitSpec = field(default_factory=SplitSpec)
    seed: int = 0
    out: Optional[Path] = None
    rate_hz: float = DEFAULT_RATE_HZ
    expected_channels: Optional[int] = None
    include_rest: bool = False
    label_policy: str = "majority"
    sliding_aggregation: bool = False
    standardize: Optional[bool] = None
    trial_vote: bool = False
    write_confusion: bool = False
    window_ms: Optional[float] = None
    increment_ms: Optional[float] = None
    feature_params: FeatureParams = field(default_factory=FeatureParams)
    jobs: int = 1

    def validate(self) -> None:
        if bool(self.inputs) == (self.synthetic is not None):
            raise SpecError("give exactly one input source: recording files or a synthetic spec")
        for t in self.techniques:
            try:
                Technique(t.upper())
            except ValueError:
                raise SpecError(f"unknown technique {t!r}; choose from WA, AG, PROPOSED") from None
        for c in self.configs:
            preset(c)
        for c in self.classifiers:
            if c not in CLASSIFIERS:
                raise SpecError(f"unknown classifier {c!r}; choose from {', '.join(CLASSIFIERS)}")
        LabelPolicy(self.label_policy)
        if self.subjects is not None and len(self.subjects) != len(self.inputs):
            raise SpecError("--subject needs one id per input file")
        if self.synthetic_subjects < 1:
            raise SpecError("synthetic_subjects must be >= 1")

    def window_for(self, technique: str) -> Tuple[WindowSpec, Optional[AggregationSpec]]:
        window, agg = make_baseline_spec(technique, self.rate_hz)
        changes = {"label_policy": LabelPolicy(self.label_policy)}
        if self.window_ms is not None:
            changes["length_ms"] = self.window_ms
        if self.increment_ms is not None:
            changes["increment_ms"] = self.increment_ms
        window = dataclasses.replace(window, **changes)
        if agg is not None and self.sliding_aggregation:
            agg = dataclasses.replace(agg, sliding=True)
        return window, agg

    def hyperparams_for(self, classifier: str) -> dict:
        hp = dict(self.hyperparams.get(classifier, {}))
        if classifier == "svm":
            hp.setdefault("seed", self.seed)
        return hp

    def feature_config(self, name: str) -> FeatureConfig:
        return preset(name, self.feature_params)


# --------------------------------------------------------------------------
# recordings
# --------------------------------------------------------------------------

def infer_subject_ids(paths: Sequence[Path]) -> List[int]:
    """First integer in each file stem, falling back to 1-based position."""
    ids = []
    for pos, p in enumerate(paths, start=1):
        m = re.search(r"\d+", Path(p).stem)
        ids.append(int(m.group()) if m else pos)
    if len(set(ids)) != len(ids):
        ids = list(range(1, len(paths) + 1))
    return ids


def recording_sources(config: RunConfig) -> List[Tuple[int, object]]:
    """(subject_id, source) pairs; source is a Path or a SyntheticSpec."""
    if config.synthetic is not None:
        return [
            (i, dataclasses.replace(config.synthetic, seed=config.synthetic.seed + i - 1, subject_id=i))
            for i in range(1, config.synthetic_subjects + 1)
        ]
    ids = config.subjects if config.subjects is not None else infer_subject_ids(config.inputs)
    return list(zip(ids, config.inputs))


def materialize(subject_id: int, source, config: RunConfig) -> Recording:
    with stage("ingest"):
        if isinstance(source, SyntheticSpec):
            return generate_synthetic(source)
        return load_recording(
            source, expected_channels=config.expected_channels,
            subject_id=subject_id, sample_rate_hz=config.rate_hz,
        )


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------

def evaluate_subject(recording: Recording, config: RunConfig) -> List[EvalReport]:
    """Every (technique, config, classifier) cell of the grid for one subject."""
    reports = []
    configs = [config.feature_config(c) for c in config.configs]
    union = union_config(configs, config.feature_params)
    for technique in config.techniques:
        technique = technique.upper()
        window, agg = config.window_for(technique)
        with stage("featurize"):
            full = featurize_recording(recording, window, agg, union, config.include_rest)
        with stage("split"):
            full_train, full_test = split_by_repetition(full, config.split)
        for fc in configs:
            train_m = select_config(full_train, fc)
            test_m = select_config(full_test, fc)
            for clf in config.classifiers:
                with stage("train"):
                    pipe = TrainedPipeline.fit(
                        train_m, clf, window, agg, fc,
                        hyperparams=config.hyperparams_for(clf),
                        standardize=config.standardize,
                        sample_rate_hz=recording.sample_rate_hz,
                        include_rest=config.include_rest,
                        technique=technique,
                    )
                with stage("evaluate"):
                    reports.append(score(pipe, test_m, recording.subject_id, clf, config.trial_vote))
                logger.info(
                    "subject %d %s %s %s: %.2f%% (%d train / %d test)",
                    recording.subject_id, technique, fc.name, clf,
                    reports[-1].accuracy_pct, len(train_m), len(test_m),
                )
    return reports


def score(pipe: TrainedPipeline, test: FeatureMatrix, subject_id: int, classifier: str,
          trial_vote: bool = False) -> EvalReport:
    pred = pipe.predict_rows(test.values)
    if trial_vote:
        pred = vote_by_trial(pred, test.labels, test.repetitions)
    classes = np.union1d(pipe.classes, np.unique(test.labels))
    return EvalReport.from_predictions(
        subject_id, pipe.technique, pipe.feature_config.name, classifier,
        pred, test.labels, pipe.n_train, classes,
    )


def _subject_job(args) -> List[EvalReport]:
    subject_id, source, config = args
    return evaluate_subject(materialize(subject_id, source, config), config)


def run_experiment(config: RunConfig) -> List[EvalReport]:
    """Run the whole grid and write report.csv, summary.csv (and confusion CSVs).

    Files are staged in a temporary directory and moved into ``config.out``
    only after every subject succeeds, so a failed run leaves nothing behind.
    """
    with stage("config"):
        config.validate()
        if config.out is None:
            raise SpecError("an output directory is required")
        out = Path(config.out)
        created = not out.exists()
        out.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
    try:
        jobs = [(sid, src, config) for sid, src in recording_sources(config)]
        if config.jobs > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=config.jobs) as pool:
                results = list(pool.map(_subject_job, jobs))
        else:
            results = [_subject_job(j) for j in jobs]
        reports = sort_reports(r for rs in results for r in rs)

        with stage("report"):
            write_report_csv(reports, staging / "report.csv")
            write_summary_csv(group_average(reports, 10), staging / "summary.csv")
            if config.write_confusion:
                cdir = staging / "confusion"
                cdir.mkdir()
                for r in reports:
                    r.confusion.to_csv(
                        cdir / f"subject{r.subject_id}_{r.technique}_{r.config}_{r.classifier}.csv"
                    )
            for item in staging.iterdir():
                target = out / item.name
                if target.is_dir():
                    shutil.rmtree(target)
                item.replace(target)
    except BaseException:
        if created:
            shutil.rmtree(out, ignore_errors=True)
        raise
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    return reports


# --------------------------------------------------------------------------
# latency benchmark
# --------------------------------------------------------------------------

@dataclass
class LatencyStats:
    extract_ms: float
    predict_ms: float
    total_ms: float
    budget_ms: float
    limit_ms: float
    window_ms: float
    n_trials: int
    n_train_rows: int
    verdict: str
    reason: str = ""

    def lines(self) -> List[str]:
        return [
            f"window_ms={self.window_ms:g} budget_ms={self.budget_ms:g} limit_ms={self.limit_ms:g}",
            f"train_rows={self.n_train_rows} trials={self.n_trials}",
            f"extract_ms={self.extract_ms:.4f} predict_ms={self.predict_ms:.4f} total_ms={self.total_ms:.4f}",
            f"verdict={self.verdict}" + (f" ({self.reason})" if self.reason else ""),
        ]


def measure_latency(pipe: TrainedPipeline, windows: Sequence[np.ndarray], budget_ms: float,
                    window_ms: float, limit_ms: float = LATENCY_LIMIT_MS, warmup: int = 5) -> LatencyStats:
    """Median per-window featurize and predict times over ``windows`` (each (C, W))."""
    from .features import extract_block

    if not windows:
        raise DataError("no windows to time")
    for w in windows[:warmup]:
        pipe.predict_window(w)
    t_ext, t_pred = [], []
    for w in windows:
        t0 = time.perf_counter()
        row = extract_block(np.asarray(w)[None], pipe.feature_config)
        t1 = time.perf_counter()
        pipe.predict_rows(row)
        t2 = time.perf_counter()
        t_ext.append(t1 - t0)
        t_pred.append(t2 - t1)
    totals = [a + b for a, b in zip(t_ext, t_pred)]
    ext = statistics.median(t_ext) * 1e3
    pred = statistics.median(t_pred) * 1e3
    total = statistics.median(totals) * 1e3
    reasons = []
    if window_ms > limit_ms:
        reasons.append(f"window length {window_ms:g}ms exceeds the {limit_ms:g}ms upper limit")
    if not total < budget_ms:
        reasons.append(f"median total {total:.3f}ms is not under the {budget_ms:g}ms increment budget")
    return LatencyStats(ext, pred, total, budget_ms, limit_ms, window_ms, len(windows),
                        pipe.n_train,
                        "FAIL" if reasons else "PASS", "; ".join(reasons))


def benchmark_latency(config: RunConfig, trials: int = 200, max_train_rows: int = 20000) -> LatencyStats:
    """Train one pipeline (first technique/config/classifier) and time single windows."""
    config.validate()
    if trials < 100:
        raise SpecError("latency medians need at least 100 trials")
    sid, src = recording_sources(config)[0]
    rec = materialize(sid, src, config)
    technique = config.techniques[0].upper()
    window, agg = config.window_for(technique)
    # measure oversize windows too; the verdict reports the violated bound
    window = dataclasses.replace(window, latency_limit_ms=None)
    fc = config.feature_config(config.configs[0])
    clf = config.classifiers[0]
    with stage("featurize"):
        full = featurize_recording(rec, window, agg, fc, config.include_rest)
        train_m, _ = split_by_repetition(full, config.split)
    if len(train_m) > max_train_rows:
        keep = np.linspace(0, len(train_m) - 1, max_train_rows).round().astype(int)
        train_m = train_m.subset(np.unique(keep))
    with stage("train"):
        pipe = TrainedPipeline.fit(
            train_m, clf, window, agg, fc, config.hyperparams_for(clf), config.standardize,
            rec.sample_rate_hz, config.include_rest, technique,
        )
    with stage("segment"):
        segs = [s for s in segment(rec, window) if s.repetition in config.split.test_repetitions]
        if not segs:
            segs = segment(rec, window)
        pick = np.linspace(0, len(segs) - 1, min(trials, len(segs))).round().astype(int)
        windows = [segs[i].samples for i in pick]
    with stage("bench"):
        return measure_latency(pipe, windows, config.increment_ms or window.increment_ms, window.length_ms)


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------

def list_presets() -> str:
    lines = ["Techniques:"]
    for t in Technique:
        w, agg = make_baseline_spec(t)
        extra = f", average groups of {agg.n}" if agg else ""
        lines.append(f"  {t.value}: {w.length_ms:g}ms windows every {w.increment_ms:g}ms{extra}")
    lines.append("Feature configurations:")
    for name in PRESETS:
        lines.append("  " + preset(name).describe())
    lines.append("Classifiers:")
    lines.append("  knn: k=5, Euclidean, standardized")
    lines.append("  nb: Gaussian, var_smoothing=1e-9, standardized")
    lines.append("  dt: Gini, max_depth=20, min_samples_leaf=1, raw features")
    lines.append("  svm: linear one-vs-rest, lambda=1e-4, epochs=10, standardized")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _csv_list(text: str) -> Tuple[str, ...]:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise SpecError(f"not a boolean: {text!r}")


def read_config_file(path) -> Dict[str, str]:
    """Parse the flat ``key = value`` config grammar."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise SpecError(f"{path}:{lineno}: empty key")
        values[key.replace("-", "_")] = value
    return values


def _add_window_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--technique", default="PROPOSED", help="WA, AG or PROPOSED (comma list for run)")
    p.add_argument("--rate-hz", type=float, default=DEFAULT_RATE_HZ)
    p.add_argument("--label-policy", default="majority", choices=[p.value for p in LabelPolicy])
    p.add_argument("--include-rest", action="store_true", help="classify rest windows as class 0")
    p.add_argument("--sliding-aggregation", action="store_true")
    p.add_argument("--window-ms", type=float, default=None, help="override the technique's window length")
    p.add_argument("--increment-ms", type=float, default=None, help="override the technique's increment")


def _add_feature_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default="C1", help="C1..C7 or e.g. MAV+WL (comma list for run)")
    p.add_argument("--zc-threshold", type=float, default=0.0)
    p.add_argument("--ssc-threshold", type=float, default=0.0)
    p.add_argument("--hist-bins", type=int, default=20)


def _add_classifier_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--classifier", default="knn", help="knn, nb, dt or svm (comma list for run)")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--svm-lambda", type=float, default=1e-4)
    p.add_argument("--svm-epochs", type=int, default=10)
    p.add_argument("--dt-max-depth", type=int, default=20)
    p.add_argument("--dt-min-leaf", type=int, default=1)
    p.add_argument("--nb-var-smoothing", type=float, default=1e-9)
    p.add_argument("--standardize", default=None, help="true/false; default depends on classifier")
    p.add_argument("--seed", type=int, default=0)


def _add_split_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--train-reps", default="1,3,4,6")
    p.add_argument("--test-reps", default="2,5")


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("inputs", nargs="*", type=Path, help="recording CSV files (one per subject)")
    p.add_argument("--subject", default=None, help="comma list of subject ids matching the inputs")
    p.add_argument("--channels", type=int, default=None, help="expected channel count")
    p.add_argument("--synthetic", action="store_true", help="use generated recordings instead of files")
    p.add_argument("--synthetic-subjects", type=int, default=1)
    _add_synth_args(p)


def _add_synth_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--num-classes", type=int, default=17)
    p.add_argument("--num-reps", type=int, default=6)
    p.add_argument("--move-s", type=float, default=5.0)
    p.add_argument("--rest-s", type=float, default=3.0)
    p.add_argument("--num-channels", type=int, default=12)
    p.add_argument("--noise", type=float, default=0.05)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emgpr", description="Overlapped-window EMG pattern recognition", allow_abbrev=False
    )
    parser.add_argument("--config-file", type=Path, default=None)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a recording CSV and print a summary")
    p.add_argument("input", type=Path)
    p.add_argument("--channels", type=int, default=None)
    p.add_argument("--rate-hz", type=float, default=DEFAULT_RATE_HZ)
    p.add_argument("--subject", type=int, default=0)
    p.add_argument("--out", type=Path, default=None, help="rewrite in canonical form")

    p = sub.add_parser("synth", help="write a synthetic recording CSV")
    _add_synth_args(p)
    p.add_argument("--rate-hz", type=float, default=DEFAULT_RATE_HZ)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("featurize", help="recording CSV -> feature matrix CSV")
    p.add_argument("input", type=Path)
    p.add_argument("--channels", type=int, default=None)
    p.add_argument("--subject", type=int, default=0)
    _add_window_args(p)
    _add_feature_args(p)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("train", help="feature matrix CSV -> trained pipeline file")
    p.add_argument("features", type=Path)
    _add_window_args(p)
    _add_feature_args(p)
    _add_classifier_args(p)
    _add_split_args(p)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("evaluate", help="score a trained pipeline on a feature matrix CSV")
    p.add_argument("model", type=Path)
    p.add_argument("features", type=Path)
    _add_split_args(p)
    p.add_argument("--subject", type=int, default=0)
    p.add_argument("--trial-vote", action="store_true")
    p.add_argument("--out", type=Path, required=True, help="report CSV path")

    p = sub.add_parser("run", help="end-to-end experiment grid")
    _add_input_args(p)
    _add_window_args(p)
    _add_feature_args(p)
    _add_classifier_args(p)
    _add_split_args(p)
    p.add_argument("--trial-vote", action="store_true")
    p.add_argument("--confusion", action="store_true", help="also write per-subject confusion CSVs")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("bench", help="per-window latency benchmark")
    _add_input_args(p)
    _add_window_args(p)
    _add_feature_args(p)
    _add_classifier_args(p)
    _add_split_args(p)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--max-train-rows", type=int, default=20000)

    sub.add_parser("presets", help="list techniques, feature configurations and classifiers")
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    pre.add_argument("--config-file", type=Path, default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config_file is None:
        return parser.parse_args(argv)
    values = read_config_file(known.config_file)
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    defaults = {a.dest: a for a in sub._actions}
    explicit = {
        a.dest for a in sub._actions for opt in a.option_strings
        if any(tok == opt or tok.startswith(opt + "=") for tok in argv)
    }
    for key, raw in values.items():
        if key not in defaults:
            raise SpecError(f"{known.config_file}: unknown key {key!r} for '{args.command}'")
        if key in explicit:
            continue
        action = defaults[key]
        if isinstance(action, argparse._StoreTrueAction):
            value = _bool(raw)
        elif key == "inputs":
            value = [Path(t) for t in _csv_list(raw)]
        elif action.type is not None:
            value = action.type(raw)
        else:
            value = raw
        setattr(args, key, value)
    return args


def _feature_params(args) -> FeatureParams:
    return FeatureParams(args.zc_threshold, args.ssc_threshold, args.hist_bins)


def _hyperparams(args) -> Dict[str, dict]:
    return {
        "knn": {"k": args.k},
        "nb": {"var_smoothing": args.nb_var_smoothing},
        "dt": {"max_depth": args.dt_max_depth, "min_samples_leaf": args.dt_min_leaf},
        "svm": {"lam": args.svm_lambda, "epochs": args.svm_epochs, "seed": args.seed},
    }


def run_config_from_args(args) -> RunConfig:
    synthetic = None
    if args.synthetic:
        synthetic = SyntheticSpec(
            num_classes=args.num_classes, num_repetitions=args.num_reps,
            movement_duration_s=args.move_s, rest_duration_s=args.rest_s,
            num_channels=args.num_channels, sample_rate_hz=args.rate_hz,
            noise_level=args.noise, seed=args.seed,
        )
    subjects = [int(s) for s in _csv_list(args.subject)] if args.subject else None
    return RunConfig(
        inputs=list(args.inputs), subjects=subjects, synthetic=synthetic,
        synthetic_subjects=args.synthetic_subjects,
        techniques=_csv_list(args.technique), configs=_csv_list(args.config),
        classifiers=tuple(c.lower() for c in _csv_list(args.classifier)),
        hyperparams=_hyperparams(args),
        split=SplitSpec.parse(args.train_reps, args.test_reps), seed=args.seed,
        out=getattr(args, "out", None), rate_hz=args.rate_hz, expected_channels=args.channels,
        include_rest=args.include_rest, label_policy=args.label_policy,
        sliding_aggregation=args.sliding_aggregation,
        standardize=None if args.standardize is None else _bool(args.standardize),
        trial_vote=getattr(args, "trial_vote", False),
        write_confusion=getattr(args, "confusion", False),
        window_ms=args.window_ms, increment_ms=args.increment_ms,
        feature_params=_feature_params(args), jobs=getattr(args, "jobs", 1),
    )


def _single(value: str, what: str) -> str:
    items = _csv_list(value)
    if len(items) != 1:
        raise SpecError(f"{what} takes exactly one value here, got {value!r}")
    return items[0]


def _cmd_ingest(args) -> None:
    rec = materialize(args.subject, args.input, RunConfig(
        inputs=[args.input], rate_hz=args.rate_hz, expected_channels=args.channels))
    movement = rec.stimulus[rec.stimulus > 0]
    print(f"samples={rec.num_samples} channels={rec.num_channels} rate_hz={rec.sample_rate_hz:g}")
    print(f"duration_s={rec.num_samples / rec.sample_rate_hz:g}")
    print(f"movements={np.unique(movement).tolist()}")
    print(f"repetitions={np.unique(rec.repetition[rec.repetition > 0]).tolist()}")
    if args.out is not None:
        write_recording(rec, args.out)


def _cmd_synth(args) -> None:
    spec = SyntheticSpec(
        num_classes=args.num_classes, num_repetitions=args.num_reps,
        movement_duration_s=args.move_s, rest_duration_s=args.rest_s,
        num_channels=args.num_channels, sample_rate_hz=args.rate_hz,
        noise_level=args.noise, seed=args.seed,
    )
    with stage("synth"):
        write_recording(generate_synthetic(spec), args.out)
    print(f"wrote {spec.total_samples} samples to {args.out}")


def _window_from_args(args):
    cfg = RunConfig(
        techniques=(_single(args.technique, "--technique"),), rate_hz=args.rate_hz,
        label_policy=args.label_policy, sliding_aggregation=args.sliding_aggregation,
        window_ms=args.window_ms, increment_ms=args.increment_ms,
        include_rest=args.include_rest, feature_params=_feature_params(args),
    )
    technique = cfg.techniques[0].upper()
    window, agg = cfg.window_for(technique)
    return cfg, technique, window, agg, cfg.feature_config(_single(args.config, "--config"))


def _cmd_featurize(args) -> None:
    cfg, _, window, agg, fc = _window_from_args(args)
    cfg.expected_channels = args.channels
    rec = materialize(args.subject, args.input, cfg)
    with stage("featurize"):
        matrix = featurize_recording(rec, window, agg, fc, args.include_rest)
    with stage("report"):
        matrix.to_csv(args.out)
    print(f"wrote {matrix.shape[0]}x{matrix.shape[1]} feature matrix to {args.out}")


def _cmd_train(args) -> None:
    cfg, technique, window, agg, fc = _window_from_args(args)
    clf = _single(args.classifier, "--classifier").lower()
    if clf not in CLASSIFIERS:
        raise SpecError(f"unknown classifier {clf!r}")
    with stage("ingest"):
        matrix = select_config(FeatureMatrix.from_csv(args.features), fc)
    with stage("split"):
        train_m, _ = split_by_repetition(matrix, SplitSpec.parse(args.train_reps, args.test_reps))
    with stage("train"):
        pipe = TrainedPipeline.fit(
            train_m, clf, window, agg, fc, _hyperparams(args)[clf],
            None if args.standardize is None else _bool(args.standardize),
            args.rate_hz, args.include_rest, technique,
        )
        pipe.save(args.out)
    print(f"trained {clf} on {len(train_m)} rows; saved to {args.out}")


def _cmd_evaluate(args) -> None:
    with stage("ingest"):
        pipe = TrainedPipeline.load(args.model)
        matrix = select_config(FeatureMatrix.from_csv(args.features), pipe.feature_config)
    with stage("split"):
        _, test_m = split_by_repetition(matrix, SplitSpec.parse(args.train_reps, args.test_reps))
    with stage("evaluate"):
        report = score(pipe, test_m, args.subject, pipe.model.kind, args.trial_vote)
    with stage("report"):
        write_report_csv([report], args.out)
    print(f"accuracy={report.accuracy_pct:.3f}% n_test={report.n_test}")


def _cmd_run(args) -> None:
    config = run_config_from_args(args)
    reports = run_experiment(config)
    for r in reports:
        print(f"subject={r.subject_id} technique={r.technique} config={r.config} "
              f"classifier={r.classifier} accuracy={r.accuracy_pct:.3f}% "
              f"n_train={r.n_train} n_test={r.n_test}")


def _cmd_bench(args) -> None:
    config = run_config_from_args(args)
    if not config.inputs and config.synthetic is None:
        config.synthetic = SyntheticSpec(seed=config.seed)
    stats = benchmark_latency(config, trials=args.trials, max_train_rows=args.max_train_rows)
    print("\n".join(stats.lines()))


COMMANDS = {
    "ingest": _cmd_ingest,
    "synth": _cmd_synth,
    "featurize": _cmd_featurize,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "run": _cmd_run,
    "bench": _cmd_bench,
    "presets": lambda args: print(list_presets()),
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        try:
            args = _apply_config_file(parser, argv)
        except SystemExit as exc:
            # argparse exits 2 on usage errors; those are validation failures here
            return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error [{getattr(exc, 'stage', 'config')}]: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DataError, OSError) as exc:
        print(f"error [{getattr(exc, 'stage', 'data')}]: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EmgprError as exc:
        print(f"error [{getattr(exc, 'stage', 'internal')}]: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        logger.debug("internal error", exc_info=True)
        print(f"internal error [{getattr(exc, 'stage', 'unknown')}]: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
