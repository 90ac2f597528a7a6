"""Analysis-window segmentation, window labeling and window aggregation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .dataset import Recording
from .errors import InputTooShortError, ShapeError, SpecError

LATENCY_LIMIT_MS = 300.0


class WindowMode(str, Enum):
    OVERLAPPED = "overlapped"
    ADJACENT = "adjacent"


class LabelPolicy(str, Enum):
    MAJORITY = "majority"
    PURE_ONLY = "pure_only"
    ENDPOINT = "endpoint"


class Technique(str, Enum):
    WA = "WA"
    AG = "AG"
    PROPOSED = "PROPOSED"


@dataclass(frozen=True)
class WindowSpec:
    length_ms: float = 256.0
    increment_ms: float = 10.0
    mode: WindowMode = WindowMode.OVERLAPPED
    label_policy: LabelPolicy = LabelPolicy.MAJORITY
    latency_limit_ms: Optional[float] = LATENCY_LIMIT_MS

    def __post_init__(self):
        object.__setattr__(self, "mode", WindowMode(self.mode))
        object.__setattr__(self, "label_policy", LabelPolicy(self.label_policy))
        if not (self.length_ms > 0 and self.increment_ms > 0):
            raise SpecError("window length and increment must be positive")

    def window_samples(self, rate_hz: float) -> int:
        return int(math.floor(self.length_ms * rate_hz / 1000.0 + 1e-9))

    def increment_samples(self, rate_hz: float) -> int:
        if self.mode is WindowMode.ADJACENT:
            return self.window_samples(rate_hz)
        return int(math.floor(self.increment_ms * rate_hz / 1000.0 + 1e-9))

    def validate(self, rate_hz: float) -> Tuple[int, int]:
        """Check the invariants at ``rate_hz``; return (W, I) in samples."""
        if self.latency_limit_ms is not None and self.length_ms > self.latency_limit_ms:
            raise SpecError(
                f"window length {self.length_ms}ms exceeds the {self.latency_limit_ms}ms latency limit"
            )
        W = self.window_samples(rate_hz)
        I = self.increment_samples(rate_hz)
        if W < 2:
            raise SpecError(f"window of {self.length_ms}ms at {rate_hz}Hz is {W} samples; need >= 2")
        if I < 1:
            raise SpecError(f"increment of {self.increment_ms}ms at {rate_hz}Hz is under one sample")
        if self.mode is WindowMode.OVERLAPPED and I > W:
            raise SpecError(f"overlapped mode needs increment ({I}) <= window ({W}) samples")
        return W, I


@dataclass(frozen=True)
class AggregationSpec:
    n: int = 5
    sliding: bool = False

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise SpecError(f"aggregation group size must be an integer >= 1, got {self.n}")


@dataclass(frozen=True, eq=False)
class Segment:
    """One analysis window: ``samples`` is a (C, W) array (usually a view)."""

    window_index: int
    start_sample: int
    samples: np.ndarray
    label: int
    repetition: int

    @property
    def shape(self) -> Tuple[int, int]:
        return self.samples.shape


def window_starts(L: int, W: int, I: int) -> np.ndarray:
    if W > L:
        return np.empty(0, dtype=np.int64)
    return np.arange(0, L - W + 1, I, dtype=np.int64)


def _mode_low(values: np.ndarray) -> int:
    """Most frequent value; ties resolve to the smallest value."""
    vals, counts = np.unique(values, return_counts=True)
    return int(vals[np.argmax(counts)])


def _window_labels(
    stim: np.ndarray, rep: np.ndarray, starts: np.ndarray, W: int, policy: LabelPolicy
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Resolve (keep mask, labels, repetitions) for every window start."""
    n = starts.size
    labels = np.empty(n, dtype=np.int64)
    reps = np.empty(n, dtype=np.int64)
    keep = np.ones(n, dtype=bool)
    if n == 0:
        return keep, labels, reps
    ends = starts + W - 1

    if policy is LabelPolicy.ENDPOINT:
        labels[:] = stim[ends]
        reps[:] = rep[ends]
        return keep, labels, reps

    # change counters let pure windows skip the per-window tally
    stim_changes = np.concatenate(([0], np.cumsum(stim[1:] != stim[:-1])))
    rep_changes = np.concatenate(([0], np.cumsum(rep[1:] != rep[:-1])))
    pure_stim = stim_changes[ends] == stim_changes[starts]
    pure_both = pure_stim & (rep_changes[ends] == rep_changes[starts])
    labels[pure_stim] = stim[starts[pure_stim]]
    reps[pure_both] = rep[starts[pure_both]]

    if policy is LabelPolicy.PURE_ONLY:
        keep = pure_stim
        for i in np.flatnonzero(pure_stim & ~pure_both):
            s = starts[i]
            reps[i] = _mode_low(rep[s:s + W])
        return keep, labels, reps

    for i in np.flatnonzero(~pure_both):
        s = starts[i]
        w_stim = stim[s:s + W]
        if pure_stim[i]:
            lab = labels[i]
        else:
            lab = _mode_low(w_stim)
            labels[i] = lab
        reps[i] = _mode_low(rep[s:s + W][w_stim == lab])
    return keep, labels, reps


def segment(recording: Recording, spec: WindowSpec) -> List[Segment]:
    """Cut ``recording`` into labeled analysis windows.

    Overlapped windows start at 0, I, 2I, ...; adjacent windows tile the
    stream with stride W.  Each ``Segment.samples`` is a read-only (C, W)
    view into the recording.  Under ``pure_only`` windows spanning more than
    one stimulus value are dropped; ``window_index`` keeps the position in the
    unfiltered window sequence.
    """
    W, I = spec.validate(recording.sample_rate_hz)
    L = recording.num_samples
    if W > L:
        raise InputTooShortError(f"window of {W} samples is longer than the recording ({L} samples)")
    starts = window_starts(L, W, I)
    keep, labels, reps = _window_labels(
        recording.stimulus, recording.repetition, starts, W, spec.label_policy
    )
    data_t = recording.channels.T
    out = []
    for idx in np.flatnonzero(keep).tolist():
        s = int(starts[idx])
        out.append(Segment(idx, s, data_t[:, s:s + W], int(labels[idx]), int(reps[idx])))
    return out


def iter_aggregate(segments: Sequence[Segment], agg: AggregationSpec) -> Iterator[Segment]:
    """Lazily yield aggregated segments; see :func:`aggregate`."""
    n = int(agg.n)
    if n < 1:
        raise SpecError("aggregation group size must be >= 1")
    segs = segments if isinstance(segments, Sequence) else list(segments)
    if not segs:
        return
    shape = segs[0].samples.shape
    for s in segs:
        if s.samples.shape != shape:
            raise ShapeError(f"segment {s.window_index} has shape {s.samples.shape}, expected {shape}")
    if agg.sliding:
        groups = ((t, range(t, t + n)) for t in range(len(segs) - n + 1))
    else:
        groups = ((t, range(t * n, t * n + n)) for t in range(len(segs) // n))
    for t, idx in groups:
        members = [segs[i] for i in idx]
        last = members[-1]
        if any(m.label != last.label for m in members):
            continue
        if n == 1:
            yield last
            continue
        # mean taken as first + mean(offset from first): identical members
        # then average to themselves bit for bit
        base = members[0].samples.astype(np.float64)
        acc = np.zeros_like(base)
        for m in members[1:]:
            acc += m.samples - base
        yield Segment(t, members[0].start_sample, base + acc / n, last.label, last.repetition)


def aggregate(segments: Sequence[Segment], agg: AggregationSpec) -> List[Segment]:
    """Average consecutive groups of ``agg.n`` segments element-wise.

    Groups are disjoint (windows nt-n .. nt-1 form output t) and a trailing
    remainder is dropped.  Groups whose labels disagree are dropped; otherwise
    the output takes the label and repetition of the group's last window.
    With ``agg.sliding`` every run of n consecutive windows is averaged.
    """
    return list(iter_aggregate(segments, agg))


def make_baseline_spec(
    technique: Technique | str, rate: float = 2000.0
) -> Tuple[WindowSpec, Optional[AggregationSpec]]:
    """Windowing regime of each technique.

    WA: 200ms windows every 10ms.  AG: 256ms every 10ms, averaged in groups
    of five.  PROPOSED: 256ms every 10ms, no aggregation.  ``rate`` is only
    validated here; sample counts come from ``WindowSpec`` at segmentation.
    """
    if not rate > 0:
        raise SpecError("rate must be positive")
    if not isinstance(technique, Technique):
        try:
            technique = Technique(str(technique).upper())
        except ValueError:
            raise SpecError(f"unknown technique {technique!r}; choose from WA, AG, PROPOSED") from None
    if technique is Technique.WA:
        return WindowSpec(200.0, 10.0), None
    if technique is Technique.AG:
        return WindowSpec(256.0, 10.0), AggregationSpec(5)
    return WindowSpec(256.0, 10.0), None
