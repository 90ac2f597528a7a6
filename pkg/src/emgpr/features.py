"""Time-domain EMG features, the C1-C7 presets and feature-matrix assembly.

Every per-feature function reduces over the last axis, so it accepts a single
channel window ``x`` of shape (M,) as well as stacked windows (..., M).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    EmptyInputError,
    FeatureInputError,
    FormatError,
    ParseError,
    ShapeError,
    SpecError,
    WindowTooShortError,
)
from .windowing import Segment


class FeatureKind(str, Enum):
    MAV = "MAV"
    MAVS = "MAVS"
    WL = "WL"
    SSC = "SSC"
    ZC = "ZC"
    HIST = "HIST"
    RMS = "RMS"


CANONICAL_ORDER: Tuple[FeatureKind, ...] = tuple(FeatureKind)


@dataclass(frozen=True)
class FeatureParams:
    zc_threshold: float = 0.0
    ssc_threshold: float = 0.0
    hist_bins: int = 20
    hist_sigma_span: float = 3.0

    def __post_init__(self):
        if self.zc_threshold < 0 or self.ssc_threshold < 0:
            raise SpecError("ZC/SSC thresholds must be nonnegative")
        if int(self.hist_bins) != self.hist_bins or self.hist_bins < 1:
            raise SpecError(f"hist_bins must be an integer >= 1, got {self.hist_bins}")
        if not self.hist_sigma_span > 0:
            raise SpecError("hist_sigma_span must be positive")


# --------------------------------------------------------------------------
# per-feature operations
# --------------------------------------------------------------------------

def _check(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0 or x.shape[-1] < 2:
        raise WindowTooShortError(f"window needs at least 2 samples, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise FeatureInputError("window contains non-finite samples")
    return x


def mav(x) -> np.ndarray:
    """Mean absolute value."""
    return _mav(np.abs(_check(x)))


def mavs(x) -> np.ndarray:
    """MAV of the second half minus MAV of the first half (first half has floor(M/2) samples)."""
    return _mavs(np.abs(_check(x)))


def wl(x) -> np.ndarray:
    """Waveform length: summed absolute first differences."""
    return _wl(np.diff(_check(x), axis=-1))


def zc(x, zc_threshold: float = 0.0) -> np.ndarray:
    """Zero crossings whose step size is at least ``zc_threshold``."""
    x = _check(x)
    return _zc(x, np.diff(x, axis=-1), zc_threshold)


def ssc(x, ssc_threshold: float = 0.0) -> np.ndarray:
    """Slope sign changes: strict local extrema whose slope product reaches the threshold."""
    return _ssc(np.diff(_check(x), axis=-1), ssc_threshold)


def rms(x) -> np.ndarray:
    """Root mean square."""
    return _rms(_check(x))


def hist(x, hist_bins: int = 20, hist_sigma_span: float = 3.0) -> np.ndarray:
    """Amplitude histogram over +/- span*sigma of the window.

    Bins are half-open [lo, hi) except the last, which is closed; samples
    outside the range clamp to the end bins.  A constant window puts every
    sample into bin floor(bins/2).  Returns float counts summing to M.
    """
    return _hist(_check(x), int(hist_bins), float(hist_sigma_span))


# unchecked kernels shared by the public functions and the block extractor

def _mav(absx):
    return absx.mean(axis=-1)


def _mavs(absx):
    h = absx.shape[-1] // 2
    return absx[..., h:].mean(axis=-1) - absx[..., :h].mean(axis=-1)


def _wl(d):
    return np.abs(d).sum(axis=-1)


def _zc(x, d, thr):
    hit = x[..., :-1] * x[..., 1:] < 0
    if thr > 0:
        hit &= np.abs(d) >= thr
    return np.count_nonzero(hit, axis=-1)


def _ssc(d, thr):
    # (x_i - x_{i-1}) * (x_i - x_{i+1}) == -d_{i-1} * d_i exactly
    prod = -(d[..., :-1] * d[..., 1:])
    hit = prod > 0
    if thr > 0:
        hit &= prod >= thr
    return np.count_nonzero(hit, axis=-1)


def _rms(x):
    return np.sqrt(np.einsum("...i,...i->...", x, x) / x.shape[-1])


def _hist(x, bins, span):
    M = x.shape[-1]
    with np.errstate(over="ignore"):
        sigma = np.asarray(x.std(axis=-1))
    if not np.isfinite(sigma).all():  # squares overflowed; rescale those windows
        bad = ~np.isfinite(sigma)
        peak = np.abs(x[bad]).max(axis=-1)
        sigma[bad] = (x[bad] / peak[:, None]).std(axis=-1) * peak
    # a constant window has sigma 0 mathematically, but its floating-point
    # std can come out as a few ulps
    flat_sigma = (sigma <= 0) | (x.max(axis=-1) == x.min(axis=-1))
    safe = np.where(flat_sigma, 1.0, sigma)
    width = (safe * (2.0 * span / bins))[..., None]
    # bin position measured from the centre, so x == 0 lands exactly on bins/2
    t = x / width
    t += bins / 2.0
    np.clip(t, -1.0, float(bins), out=t)
    idx = t.astype(np.intp)  # truncation; t in (-1, 0) also maps to bin 0
    frac = t - idx
    frac -= 0.5
    near = np.abs(frac, out=frac) >= 0.5 - 1e-7
    np.clip(idx, 0, bins - 1, out=idx)
    if near.any():
        _fix_edge_bins(x, t, sigma, span, bins, near, idx)
    if flat_sigma.any():
        idx[flat_sigma] = bins // 2

    flat = idx.reshape(-1, M)
    offsets = (np.arange(flat.shape[0]) * bins)[:, None]
    counts = np.bincount((flat + offsets).ravel(), minlength=flat.shape[0] * bins)
    return counts.reshape(x.shape[:-1] + (bins,)).astype(np.float64)


def _fix_edge_bins(x, t, sigma, span, bins, near, idx):
    """Exact bin for samples within rounding distance of an inner edge.

    Edge k sits at (2k/bins - 1) * span * sigma; comparing in rationals keeps
    the half-open rule exact where the floating-point quotient is ambiguous.
    """
    near &= (t > 0.5) & (t < bins - 0.5) & (x != 0) & (sigma > 0)[..., None]
    pos = np.nonzero(near)
    sig = np.broadcast_to(sigma[..., None], x.shape)[pos]
    for j, (v, s) in enumerate(zip(x[pos].tolist(), sig.tolist())):
        scale = Fraction(span) * Fraction(s)
        fv = Fraction(v)
        k = int(round(float((fv / scale + 1) * bins / 2)))
        k = min(max(k, 1), bins - 1)
        edge = scale * Fraction(2 * k - bins, bins)
        where = tuple(p[j] for p in pos)
        idx[where] = k if fv >= edge else k - 1


# --------------------------------------------------------------------------
# configurations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureConfig:
    name: str
    kinds: Tuple[FeatureKind, ...]
    params: FeatureParams = field(default_factory=FeatureParams)

    def __post_init__(self):
        try:
            chosen = {(k if isinstance(k, FeatureKind) else FeatureKind(str(k).upper())) for k in self.kinds}
        except ValueError as exc:
            raise SpecError(f"unknown feature kind: {exc}") from None
        if not chosen:
            raise SpecError("a feature configuration needs at least one feature")
        object.__setattr__(self, "kinds", tuple(k for k in CANONICAL_ORDER if k in chosen))

    def kind_width(self, kind: FeatureKind) -> int:
        return int(self.params.hist_bins) if kind is FeatureKind.HIST else 1

    @property
    def per_channel(self) -> int:
        return sum(self.kind_width(k) for k in self.kinds)

    def num_columns(self, num_channels: int) -> int:
        return num_channels * self.per_channel

    def column_meta(self, num_channels: int) -> List["ColumnMeta"]:
        cols = []
        for ch in range(num_channels):
            for k in self.kinds:
                if k is FeatureKind.HIST:
                    cols.extend(ColumnMeta(ch, k, b) for b in range(self.kind_width(k)))
                else:
                    cols.append(ColumnMeta(ch, k, None))
        return cols

    def describe(self) -> str:
        return f"{self.name}: " + " ".join(k.value for k in self.kinds)


_K = FeatureKind
PRESETS = {
    "C1": (_K.MAV, _K.MAVS, _K.WL, _K.SSC, _K.ZC, _K.HIST, _K.RMS),
    "C2": (_K.RMS,),
    "C3": (_K.WL,),
    "C4": (_K.WL, _K.RMS),
    "C5": (_K.WL, _K.ZC, _K.RMS),
    "C6": (_K.WL, _K.SSC),
    "C7": (_K.MAV, _K.MAVS, _K.WL, _K.SSC, _K.ZC, _K.RMS),
}


def preset(name: str, params: Optional[FeatureParams] = None) -> FeatureConfig:
    """Named configuration C1..C7, or a custom ``"MAV+WL+..."`` kind list."""
    key = name.strip().upper()
    if key in PRESETS:
        return FeatureConfig(key, PRESETS[key], params or FeatureParams())
    parts = [p for p in key.replace(",", "+").split("+") if p]
    if not parts:
        raise SpecError(f"unknown feature configuration {name!r}")
    try:
        kinds = tuple(FeatureKind(p) for p in parts)
    except ValueError:
        raise SpecError(
            f"unknown feature configuration {name!r}; use C1..C7 or a '+'-joined list of "
            + ", ".join(k.value for k in FeatureKind)
        ) from None
    return FeatureConfig("+".join(k.value for k in FeatureKind if k in kinds), kinds, params or FeatureParams())


# --------------------------------------------------------------------------
# matrix assembly
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ColumnMeta:
    channel: int
    kind: FeatureKind
    bin: Optional[int] = None

    @property
    def name(self) -> str:
        base = f"ch{self.channel + 1}_{self.kind.value}"
        return base if self.bin is None else f"{base}_{self.bin}"

    @classmethod
    def parse(cls, name: str) -> "ColumnMeta":
        parts = name.split("_")
        try:
            if len(parts) not in (2, 3) or not parts[0].startswith("ch"):
                raise ValueError
            channel = int(parts[0][2:]) - 1
            kind = FeatureKind(parts[1])
            b = int(parts[2]) if len(parts) == 3 else None
        except ValueError:
            raise FormatError(f"unrecognised feature column name {name!r}") from None
        if (kind is FeatureKind.HIST) != (b is not None) or channel < 0:
            raise FormatError(f"unrecognised feature column name {name!r}")
        return cls(channel, kind, b)


@dataclass(eq=False)
class FeatureMatrix:
    """N x P feature rows with labels, repetitions and column provenance."""

    values: np.ndarray
    column_meta: List[ColumnMeta]
    labels: np.ndarray
    repetitions: np.ndarray
    subject_id: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ShapeError(f"feature values must be 2-D, got {self.values.shape}")
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.repetitions = np.asarray(self.repetitions, dtype=np.int64)
        n, p = self.values.shape
        if len(self.column_meta) != p:
            raise ShapeError(f"{len(self.column_meta)} column descriptors for {p} columns")
        if self.labels.shape != (n,) or self.repetitions.shape != (n,):
            raise ShapeError("labels/repetitions must have one entry per row")

    @property
    def shape(self) -> Tuple[int, int]:
        return self.values.shape

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def column_names(self) -> List[str]:
        return [c.name for c in self.column_meta]

    def subset(self, mask) -> "FeatureMatrix":
        return FeatureMatrix(
            self.values[mask], list(self.column_meta), self.labels[mask],
            self.repetitions[mask], self.subject_id,
        )

    def equals(self, other: "FeatureMatrix") -> bool:
        return (
            self.column_meta == other.column_meta
            and self.values.shape == other.values.shape
            and np.array_equal(self.values.view(np.uint64), other.values.view(np.uint64))
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.repetitions, other.repetitions)
        )

    def to_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(["label", "repetition"] + self.column_names) + "\n")
            labels, reps = self.labels.tolist(), self.repetitions.tolist()
            for i, row in enumerate(self.values.tolist()):
                fh.write(f"{labels[i]},{reps[i]},{','.join(map(repr, row))}\n")

    @classmethod
    def from_csv(cls, path: Union[str, Path], subject_id: int = 0) -> "FeatureMatrix":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
        if header[:2] != ["label", "repetition"] or len(header) < 3:
            raise FormatError(f"{path}: header must start with 'label,repetition' and list features")
        meta = [ColumnMeta.parse(h) for h in header[2:]]
        try:
            data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.float64, ndmin=2, encoding="utf-8")
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}") from None
        if data.shape[0] == 0:
            raise EmptyInputError(f"{path}: no feature rows")
        if data.shape[1] != len(header):
            raise FormatError(f"{path}: expected {len(header)} columns, found {data.shape[1]}")
        return cls(
            np.ascontiguousarray(data[:, 2:]), meta,
            data[:, 0].astype(np.int64), data[:, 1].astype(np.int64), subject_id,
        )


def _block_features(block: np.ndarray, config: FeatureConfig) -> np.ndarray:
    """(B, C, W) windows -> (B, C * per_channel) feature rows in canonical layout."""
    p = config.params
    kinds = set(config.kinds)
    absx = np.abs(block) if kinds & {FeatureKind.MAV, FeatureKind.MAVS} else None
    d = np.diff(block, axis=-1) if kinds & {FeatureKind.WL, FeatureKind.SSC, FeatureKind.ZC} else None
    parts = []
    for k in config.kinds:
        if k is FeatureKind.MAV:
            v = _mav(absx)
        elif k is FeatureKind.MAVS:
            v = _mavs(absx)
        elif k is FeatureKind.WL:
            v = _wl(d)
        elif k is FeatureKind.SSC:
            v = _ssc(d, p.ssc_threshold)
        elif k is FeatureKind.ZC:
            v = _zc(block, d, p.zc_threshold)
        elif k is FeatureKind.RMS:
            v = _rms(block)
        else:
            parts.append(_hist(block, int(p.hist_bins), float(p.hist_sigma_span)))
            continue
        parts.append(np.asarray(v, dtype=np.float64)[..., None])
    per_channel = np.concatenate(parts, axis=-1)  # (B, C, per_channel)
    return per_channel.reshape(block.shape[0], -1)


def _stack(segments: Sequence[Segment]) -> np.ndarray:
    return np.stack([s.samples for s in segments]).astype(np.float64, copy=False)


def extract_block(block: np.ndarray, config: FeatureConfig) -> np.ndarray:
    """Feature rows for a stacked (B, C, W) array of windows."""
    block = np.asarray(block, dtype=np.float64)
    if block.ndim != 3:
        raise ShapeError(f"expected (B, C, W) windows, got shape {block.shape}")
    if block.shape[-1] < 2:
        raise WindowTooShortError(f"windows have {block.shape[-1]} samples per channel; need >= 2")
    finite = np.isfinite(block).all(axis=-1)
    if not finite.all():
        b, c = np.argwhere(~finite)[0]
        raise FeatureInputError(f"non-finite samples in window {b}, channel {c + 1}")
    return _block_features(block, config)


def extract(segment: Segment, config: FeatureConfig) -> np.ndarray:
    """Feature row of one segment: for each channel, each kind in config order."""
    return extract_block(np.asarray(segment.samples)[None], config)[0]


def build_matrix(
    segments: Iterable[Segment],
    config: FeatureConfig,
    subject_id: int = 0,
    batch_size: int = 256,
) -> FeatureMatrix:
    """Featurize every segment; row t comes from segments[t] alone.

    ``segments`` may be a lazy iterable (e.g. from ``iter_aggregate``); it is
    consumed in batches so aggregated windows never all live in memory.
    """
    rows, labels, reps = [], [], []
    shape = None
    batch: List[Segment] = []

    def flush():
        rows.append(extract_block(_stack(batch), config))
        batch.clear()

    for s in segments:
        if shape is None:
            shape = s.samples.shape
        elif s.samples.shape != shape:
            raise ShapeError(f"segment {s.window_index} has shape {s.samples.shape}, expected {shape}")
        batch.append(s)
        labels.append(s.label)
        reps.append(s.repetition)
        if len(batch) >= batch_size:
            flush()
    if batch:
        flush()
    if shape is None:
        raise EmptyInputError("no segments to featurize")
    values = np.concatenate(rows, axis=0)
    return FeatureMatrix(values, config.column_meta(shape[0]), np.array(labels), np.array(reps), subject_id)
