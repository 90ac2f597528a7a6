"""Accuracy, confusion matrices, per-subject reports and 10-subject group means."""
from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import EmptyInputError, LabelError, ShapeError

REPORT_COLUMNS = ["subject", "technique", "config", "classifier", "accuracy_pct", "n_train", "n_test"]
SUMMARY_COLUMNS = [
    "group", "first_subject", "last_subject", "n_subjects",
    "technique", "config", "classifier", "mean_accuracy_pct",
]


def _pair(predicted, truth) -> Tuple[np.ndarray, np.ndarray]:
    p, t = np.asarray(predicted), np.asarray(truth)
    if p.shape != t.shape or p.ndim != 1:
        raise ShapeError(f"predicted {p.shape} and truth {t.shape} must be equal-length 1-D sequences")
    if p.size == 0:
        raise EmptyInputError("cannot score an empty prediction set")
    return p, t


def accuracy(predicted, truth) -> float:
    """Top-1 accuracy in percent."""
    p, t = _pair(predicted, truth)
    return 100.0 * np.count_nonzero(p == t) / p.size


@dataclass(eq=False)
class ConfusionMatrix:
    """Rows are true classes, columns predicted classes."""

    classes: np.ndarray
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return 100.0 * np.trace(self.counts) / self.total

    def per_class_accuracy(self) -> Dict[int, float]:
        out = {}
        for i, c in enumerate(self.classes.tolist()):
            n = self.counts[i].sum()
            out[c] = float("nan") if n == 0 else 100.0 * self.counts[i, i] / n
        return out

    def to_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["truth\\predicted"] + self.classes.tolist())
            for c, row in zip(self.classes.tolist(), self.counts.tolist()):
                w.writerow([c] + row)


def confusion(predicted, truth, classes: Optional[Sequence] = None) -> ConfusionMatrix:
    p, t = _pair(predicted, truth)
    if classes is None:
        classes = np.unique(np.concatenate([p, t]))
    classes = np.asarray(classes)
    index = {c: i for i, c in enumerate(classes.tolist())}
    unknown = (set(p.tolist()) | set(t.tolist())) - index.keys()
    if unknown:
        raise LabelError(f"labels {sorted(unknown)} are not in the class list")
    pi = np.array([index[v] for v in p.tolist()])
    ti = np.array([index[v] for v in t.tolist()])
    K = classes.size
    counts = np.bincount(ti * K + pi, minlength=K * K).reshape(K, K)
    return ConfusionMatrix(classes, counts)


def vote_by_trial(predicted, labels, repetitions) -> np.ndarray:
    """Replace each row's prediction by the majority over its movement trial.

    A trial is a maximal run of consecutive rows sharing (label, repetition).
    Vote ties go to the smaller label.
    """
    p = np.asarray(predicted)
    key = np.stack([np.asarray(labels), np.asarray(repetitions)], axis=1)
    out = p.copy()
    if p.size == 0:
        return out
    bounds = np.flatnonzero(np.any(key[1:] != key[:-1], axis=1)) + 1
    for lo, hi in zip(np.r_[0, bounds], np.r_[bounds, p.size]):
        vals, counts = np.unique(p[lo:hi], return_counts=True)
        out[lo:hi] = vals[np.argmax(counts)]
    return out


@dataclass(eq=False)
class EvalReport:
    subject_id: int
    technique: str
    config: str
    classifier: str
    accuracy_pct: float
    confusion: ConfusionMatrix
    n_train: int
    n_test: int
    per_class_accuracy: Dict[int, float] = field(default_factory=dict)

    @classmethod
    def from_predictions(cls, subject_id, technique, config, classifier, predicted, truth,
                         n_train, classes=None) -> "EvalReport":
        cm = confusion(predicted, truth, classes)
        return cls(subject_id, technique, config, classifier, cm.accuracy, cm,
                   int(n_train), int(np.asarray(truth).size), cm.per_class_accuracy())

    def row(self) -> list:
        return [self.subject_id, self.technique, self.config, self.classifier,
                repr(float(self.accuracy_pct)), self.n_train, self.n_test]


@dataclass
class GroupSummary:
    """Mean accuracy per (technique, config, classifier) for consecutive subject groups."""

    groups: List[List[int]]
    means: Dict[Tuple[str, str, str], List[float]]

    def rows(self) -> List[list]:
        out = []
        for key in sorted(self.means):
            for g, members in enumerate(self.groups):
                m = self.means[key][g]
                if m is None:
                    continue
                out.append([g + 1, members[0], members[-1], len(members), *key, repr(float(m))])
        return out


def group_average(reports: Iterable[EvalReport], group_size: int = 10) -> GroupSummary:
    """Average per-subject accuracies over consecutive groups of ``group_size`` subjects.

    Subjects are ordered by id and chunked; the last group may be short.  A
    key missing for every subject of a group yields ``None`` for that group.
    """
    reports = list(reports)
    if not reports:
        raise EmptyInputError("no reports to summarise")
    if group_size < 1:
        raise ShapeError("group_size must be >= 1")
    subjects = sorted({r.subject_id for r in reports})
    groups = [subjects[i:i + group_size] for i in range(0, len(subjects), group_size)]
    where = {s: g for g, members in enumerate(groups) for s in members}
    acc: Dict[Tuple[str, str, str], List[List[float]]] = defaultdict(lambda: [[] for _ in groups])
    for r in reports:
        acc[(r.technique, r.config, r.classifier)][where[r.subject_id]].append(r.accuracy_pct)
    means = {k: [float(np.mean(v)) if v else None for v in per_group] for k, per_group in acc.items()}
    return GroupSummary(groups, means)


def sort_reports(reports: Iterable[EvalReport]) -> List[EvalReport]:
    return sorted(reports, key=lambda r: (r.subject_id, r.technique, r.config, r.classifier))


def write_report_csv(reports: Iterable[EvalReport], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in sort_reports(reports):
            w.writerow(r.row())


def read_report_csv(path: Union[str, Path]) -> List[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def write_summary_csv(summary: GroupSummary, path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        w.writerows(summary.rows())
