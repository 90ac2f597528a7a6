"""Recording data model, CSV ingestion, synthetic generator and repetition splits.

The canonical on-disk format is a headed CSV::

    sample_index,ch1,...,chC,stimulus,repetition

``sample_index`` starts at 0 and increases by 1 per row.  Voltages are written
with the shortest round-trippable decimal form, so ``write_recording`` followed
by ``load_recording`` reproduces the array bit for bit.
"""
from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .errors import (
    ChannelCountError,
    FormatError,
    ParseError,
    SpecError,
    SplitError,
)

logger = logging.getLogger(__name__)

DEFAULT_RATE_HZ = 2000.0
DEFAULT_CHANNELS = 12

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class Recording:
    """One subject's multi-channel sEMG stream with per-sample labels.

    ``channels`` is (L, C).  ``stimulus`` holds movement labels (0 = rest) and
    ``repetition`` the repetition index (0 during rest).  Arrays are made
    read-only on construction.
    """

    channels: np.ndarray
    stimulus: np.ndarray
    repetition: np.ndarray
    subject_id: int = 0
    source_tag: str = "csv"
    sample_rate_hz: float = DEFAULT_RATE_HZ

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=np.float64)
        if ch.ndim == 1:
            ch = ch[:, None]
        if ch.ndim != 2:
            raise FormatError(f"channels must be 2-D (L, C), got shape {ch.shape}")
        stim = np.asarray(self.stimulus)
        rep = np.asarray(self.repetition)
        L = ch.shape[0]
        if L < 1 or ch.shape[1] < 1:
            raise FormatError(f"recording needs L >= 1 and C >= 1, got {ch.shape}")
        if stim.shape != (L,) or rep.shape != (L,):
            raise FormatError(
                f"stimulus/repetition length mismatch: channels L={L}, "
                f"stimulus {stim.shape}, repetition {rep.shape}"
            )
        stim = _as_label_array(stim, "stimulus")
        rep = _as_label_array(rep, "repetition")
        if not self.sample_rate_hz > 0:
            raise SpecError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        for arr in (ch, stim, rep):
            arr.setflags(write=False)
        object.__setattr__(self, "channels", ch)
        object.__setattr__(self, "stimulus", stim)
        object.__setattr__(self, "repetition", rep)

    @property
    def num_samples(self) -> int:
        return self.channels.shape[0]

    @property
    def num_channels(self) -> int:
        return self.channels.shape[1]

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.stimulus)

    def equals(self, other: "Recording") -> bool:
        """Bit-level equality of the data arrays and metadata."""
        return (
            self.subject_id == other.subject_id
            and self.sample_rate_hz == other.sample_rate_hz
            and self.channels.shape == other.channels.shape
            and np.array_equal(self.channels.view(np.uint64), other.channels.view(np.uint64))
            and np.array_equal(self.stimulus, other.stimulus)
            and np.array_equal(self.repetition, other.repetition)
        )

    def with_rest_attached(self) -> "Recording":
        """Copy whose rest samples carry the repetition of the preceding movement.

        Rest samples before the first movement take the first repetition seen.
        Used when rest windows are classified as their own class, so the
        repetition split can place them.
        """
        rep = self.repetition.copy()
        idx = np.where(rep > 0, np.arange(rep.size), -1)
        np.maximum.accumulate(idx, out=idx)
        nz = np.flatnonzero(rep > 0)
        if nz.size:
            filled = np.where(idx >= 0, rep[np.maximum(idx, 0)], rep[nz[0]])
            rep = np.where(rep > 0, rep, filled)
        return Recording(
            self.channels, self.stimulus, rep,
            subject_id=self.subject_id, source_tag=self.source_tag,
            sample_rate_hz=self.sample_rate_hz,
        )


def _as_label_array(arr: np.ndarray, name: str) -> np.ndarray:
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise ParseError(f"{name} must hold integers")
    elif arr.dtype.kind not in "iu":
        raise ParseError(f"{name} must hold integers, got dtype {arr.dtype}")
    out = arr.astype(np.int64)
    if out.size and out.min() < 0:
        raise FormatError(f"{name} values must be nonnegative")
    return out


# --------------------------------------------------------------------------
# CSV I/O
# --------------------------------------------------------------------------

def _expected_header(num_channels: int) -> list[str]:
    return ["sample_index"] + [f"ch{i}" for i in range(1, num_channels + 1)] + ["stimulus", "repetition"]


def write_recording(recording: Recording, path: PathLike) -> None:
    """Write ``recording`` in the canonical CSV layout."""
    header = ",".join(_expected_header(recording.num_channels))
    stim = recording.stimulus.tolist()
    rep = recording.repetition.tolist()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header + "\n")
        buf = []
        for i, row in enumerate(recording.channels.tolist()):
            buf.append(f"{i},{','.join(map(repr, row))},{stim[i]},{rep[i]}\n")
            if len(buf) >= 65536:
                fh.write("".join(buf))
                buf.clear()
        fh.write("".join(buf))


def _read_header(path: PathLike) -> list[str]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline()
    if not first.strip():
        raise FormatError(f"{path}: missing header row")
    return [c.strip() for c in first.strip().split(",")]


def _check_header(header: list[str], path: PathLike) -> int:
    if len(header) < 4 or header[0] != "sample_index" or header[-2:] != ["stimulus", "repetition"]:
        raise FormatError(
            f"{path}: header must be 'sample_index,ch1,...,chC,stimulus,repetition', got {header!r}"
        )
    num_channels = len(header) - 3
    if header != _expected_header(num_channels):
        raise FormatError(f"{path}: channel columns must be named ch1..ch{num_channels}, got {header[1:-2]!r}")
    return num_channels


def _locate_error(path: PathLike, ncols: int) -> None:
    """Slow scan that raises a precise FormatError/ParseError naming the row."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != ncols:
                raise FormatError(
                    f"{path}: row {lineno - 1} (line {lineno}) has {len(row)} columns, expected {ncols}"
                )
            for j, tok in enumerate(row):
                try:
                    float(tok)
                except ValueError:
                    kind = "voltage" if 0 < j < ncols - 2 else "field"
                    raise ParseError(
                        f"{path}: row {lineno - 1} (line {lineno}) column {j + 1}: "
                        f"non-numeric {kind} {tok!r}"
                    ) from None


def load_recording(
    path: PathLike,
    expected_channels: Optional[int] = None,
    subject_id: int = 0,
    sample_rate_hz: float = DEFAULT_RATE_HZ,
    source_tag: str = "csv",
) -> Recording:
    """Load a canonical-format CSV into a :class:`Recording`.

    Raises:
        FormatError: bad header, ragged rows, non-contiguous sample_index.
        ParseError: a non-numeric voltage or label.
        ChannelCountError: the file has a channel count other than
            ``expected_channels``.
    """
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"{path}: no such file")
    header = _read_header(path)
    num_channels = _check_header(header, path)
    if expected_channels is not None and num_channels != expected_channels:
        raise ChannelCountError(
            f"{path}: found {num_channels} channel columns, expected {expected_channels}"
        )
    ncols = num_channels + 3
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)  # empty files are reported below
            data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.float64, ndmin=2, encoding="utf-8")
    except ValueError:
        _locate_error(path, ncols)
        raise
    if data.size == 0:
        raise FormatError(f"{path}: no data rows")
    if data.shape[1] != ncols:
        _locate_error(path, ncols)
        raise FormatError(f"{path}: expected {ncols} columns, found {data.shape[1]}")

    sample_index = data[:, 0]
    bad = np.flatnonzero(sample_index != np.arange(data.shape[0]))
    if bad.size:
        r = int(bad[0])
        raise FormatError(
            f"{path}: row {r + 1}: sample_index {sample_index[r]!r} breaks the 0-based +1 sequence"
        )
    for j, name in ((ncols - 2, "stimulus"), (ncols - 1, "repetition")):
        col = data[:, j]
        bad = np.flatnonzero((col != np.round(col)) | (col < 0))
        if bad.size:
            r = int(bad[0])
            raise ParseError(f"{path}: row {r + 1}: {name} must be a nonnegative integer, got {col[r]!r}")

    channels = np.ascontiguousarray(data[:, 1:1 + num_channels])
    finite = np.isfinite(channels).all(axis=1)
    if not finite.all():
        r = int(np.flatnonzero(~finite)[0])
        raise ParseError(f"{path}: row {r + 1}: voltages must be finite decimal reals")
    logger.debug("loaded %s: L=%d C=%d", path, channels.shape[0], num_channels)
    return Recording(
        channels,
        data[:, -2].astype(np.int64),
        data[:, -1].astype(np.int64),
        subject_id=subject_id,
        source_tag=source_tag,
        sample_rate_hz=sample_rate_hz,
    )


# --------------------------------------------------------------------------
# Synthetic recordings
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the deterministic synthetic acquisition protocol."""

    num_classes: int = 17
    num_repetitions: int = 6
    movement_duration_s: float = 5.0
    rest_duration_s: float = 3.0
    num_channels: int = DEFAULT_CHANNELS
    sample_rate_hz: float = DEFAULT_RATE_HZ
    noise_level: float = 0.05
    seed: int = 0
    subject_id: int = 0

    def __post_init__(self):
        if self.num_classes < 2:
            raise SpecError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.num_repetitions < 1:
            raise SpecError(f"num_repetitions must be >= 1, got {self.num_repetitions}")
        if self.num_channels < 1:
            raise SpecError(f"num_channels must be >= 1, got {self.num_channels}")
        if not (self.movement_duration_s > 0 and self.rest_duration_s > 0):
            raise SpecError("movement and rest durations must be positive")
        if not self.sample_rate_hz > 0:
            raise SpecError("sample_rate_hz must be positive")
        if not self.noise_level >= 0:
            raise SpecError("noise_level must be nonnegative")
        if self.movement_samples < 1 or self.rest_samples < 1:
            raise SpecError("durations are shorter than one sample at this rate")

    @property
    def movement_samples(self) -> int:
        return int(round(self.movement_duration_s * self.sample_rate_hz))

    @property
    def rest_samples(self) -> int:
        return int(round(self.rest_duration_s * self.sample_rate_hz))

    @property
    def total_samples(self) -> int:
        return self.num_repetitions * self.num_classes * (self.movement_samples + self.rest_samples)


# movement amplitudes are drawn in [_AMP_LO, _AMP_HI]; rest sits well below
_AMP_LO, _AMP_HI = 0.2, 1.0
_REST_STD = 0.02
_MIN_PROFILE_GAP = 0.25


def class_profiles(num_classes: int, num_channels: int, rng: np.random.Generator) -> np.ndarray:
    """Draw (K, C) per-channel amplitude profiles with a guaranteed minimum gap.

    Profiles are redrawn until every pair differs by at least
    ``_MIN_PROFILE_GAP`` in log-amplitude (Euclidean), so classes stay
    separable by amplitude features.
    """
    gap = _MIN_PROFILE_GAP * min(1.0, np.sqrt(num_channels / DEFAULT_CHANNELS))
    for _ in range(1000):
        prof = rng.uniform(_AMP_LO, _AMP_HI, size=(num_classes, num_channels))
        logp = np.log(prof)
        d = np.sqrt(((logp[:, None, :] - logp[None, :, :]) ** 2).sum(-1))
        d[np.diag_indices(num_classes)] = np.inf
        if d.min() >= gap:
            return prof
    raise SpecError(
        f"could not draw {num_classes} distinct amplitude profiles over {num_channels} channels"
    )


def generate_synthetic(spec: SyntheticSpec) -> Recording:
    """Generate a seeded recording following the movement/rest cadence.

    For each repetition r and class k, ``movement_samples`` of zero-mean
    Gaussian noise scaled per channel by class k's profile (labeled (k, r))
    are followed by ``rest_samples`` of low-amplitude noise labeled (0, 0).
    ``noise_level`` adds white background noise everywhere.
    """
    rng = np.random.default_rng(spec.seed)
    K, R, C = spec.num_classes, spec.num_repetitions, spec.num_channels
    prof = class_profiles(K, C, rng)
    m, s = spec.movement_samples, spec.rest_samples
    block = m + s
    L = spec.total_samples

    stimulus = np.zeros(L, dtype=np.int64)
    repetition = np.zeros(L, dtype=np.int64)
    scale = np.full((L, C), _REST_STD)
    for r in range(R):
        for k in range(K):
            start = (r * K + k) * block
            stimulus[start:start + m] = k + 1
            repetition[start:start + m] = r + 1
            scale[start:start + m] = prof[k]

    signal = rng.standard_normal((L, C))
    signal *= scale
    if spec.noise_level > 0:
        signal += spec.noise_level * rng.standard_normal((L, C))
    return Recording(
        signal, stimulus, repetition,
        subject_id=spec.subject_id, source_tag="synthetic",
        sample_rate_hz=spec.sample_rate_hz,
    )


# --------------------------------------------------------------------------
# Repetition split
# --------------------------------------------------------------------------

DEFAULT_TRAIN_REPS = frozenset({1, 3, 4, 6})
DEFAULT_TEST_REPS = frozenset({2, 5})


@dataclass(frozen=True)
class SplitSpec:
    train_repetitions: frozenset = field(default=DEFAULT_TRAIN_REPS)
    test_repetitions: frozenset = field(default=DEFAULT_TEST_REPS)

    def __post_init__(self):
        tr = frozenset(int(r) for r in self.train_repetitions)
        te = frozenset(int(r) for r in self.test_repetitions)
        if not tr or not te:
            raise SpecError("train and test repetition sets must both be nonempty")
        if tr & te:
            raise SpecError(f"train and test repetitions overlap: {sorted(tr & te)}")
        object.__setattr__(self, "train_repetitions", tr)
        object.__setattr__(self, "test_repetitions", te)

    @classmethod
    def parse(cls, train: str, test: str) -> "SplitSpec":
        """Build from comma-separated strings such as ``"1,3,4,6"``."""
        try:
            return cls(_parse_int_set(train), _parse_int_set(test))
        except ValueError as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"bad repetition list: {exc}") from None


def _parse_int_set(text: Union[str, Iterable[int]]) -> frozenset:
    if isinstance(text, str):
        return frozenset(int(t) for t in text.replace(" ", "").split(",") if t)
    return frozenset(int(t) for t in text)


def split_by_repetition(rows, split: SplitSpec):
    """Partition a feature matrix into (train, test) by repetition index.

    ``rows`` is any object exposing ``repetitions`` and ``subset(mask)`` (a
    :class:`~emgpr.features.FeatureMatrix`).  Rows whose repetition is in
    neither set are dropped; order is preserved within each part.
    """
    reps = np.asarray(rows.repetitions)
    train_mask = np.isin(reps, list(split.train_repetitions))
    test_mask = np.isin(reps, list(split.test_repetitions))
    if not train_mask.any():
        raise SplitError("no training rows after repetition filtering")
    if not test_mask.any():
        raise SplitError("no test rows after repetition filtering")
    missing = (split.train_repetitions | split.test_repetitions) - set(np.unique(reps).tolist())
    if missing:
        raise SpecError(f"split names repetitions not present in the data: {sorted(missing)}")
    return rows.subset(train_mask), rows.subset(test_mask)
