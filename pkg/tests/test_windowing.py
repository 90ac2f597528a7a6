import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import make_recording
from emgpr.errors import InputTooShortError, ShapeError, SpecError
from emgpr.windowing import (
    AggregationSpec,
    LabelPolicy,
    Segment,
    Technique,
    WindowMode,
    WindowSpec,
    aggregate,
    iter_aggregate,
    make_baseline_spec,
    segment,
)


def spec_for_samples(W, I, mode=WindowMode.OVERLAPPED, policy=LabelPolicy.MAJORITY):
    # paired with recordings at 1 kHz, where one millisecond is one sample
    return WindowSpec(float(W), float(I), mode, policy, latency_limit_ms=None)


def rec_1khz(stimulus, repetition=None, channels=1):
    return make_recording(stimulus, repetition, channels=channels, rate=1000.0)


# ------------------------------------------------------------ segmentation

def test_window_count_example():
    rec = make_recording(np.ones(1000, int))
    segs = segment(rec, WindowSpec(256, 10))
    assert len(segs) == (1000 - 512) // 20 + 1 == 25
    assert [s.start_sample for s in segs] == list(range(0, 481, 20))
    assert all(s.samples.shape == (1, 512) for s in segs)


def test_adjacent_tiling():
    rec = make_recording(np.ones(1024, int), channels=3)
    segs = segment(rec, WindowSpec(256, 10, mode="adjacent"))
    assert [s.start_sample for s in segs] == [0, 512]
    assert segs[1].samples.shape == (3, 512)
    np.testing.assert_array_equal(segs[1].samples, rec.channels[512:1024].T)


def test_sample_counts_at_2khz():
    assert WindowSpec(256, 10).validate(2000) == (512, 20)
    assert WindowSpec(200, 10).validate(2000) == (400, 20)


@pytest.mark.invariant
@settings(max_examples=200, deadline=None)
@given(st.integers(2, 400), st.data())
def test_window_count_law(W, data):
    L = data.draw(st.integers(W, 1200))
    I = data.draw(st.integers(1, W))
    rec = rec_1khz(np.ones(L, int))
    segs = segment(rec, spec_for_samples(W, I))
    expected = oracles.window_starts(L, W, I)
    assert len(segs) == len(expected) == (L - W) // I + 1
    assert [s.start_sample for s in segs] == expected
    assert all(s.start_sample + W <= L for s in segs)


@pytest.mark.invariant
@settings(max_examples=100, deadline=None)
@given(st.integers(2, 200), st.integers(0, 1000))
def test_adjacent_count_law(W, extra):
    L = W + extra
    segs = segment(rec_1khz(np.ones(L, int)), spec_for_samples(W, 1, mode=WindowMode.ADJACENT))
    assert len(segs) == L // W
    assert all(b.start_sample - a.start_sample == W for a, b in zip(segs, segs[1:]))


def test_segments_view_the_recording():
    rec = rec_1khz(np.ones(100, int), channels=2)
    segs = segment(rec, spec_for_samples(10, 5))
    assert np.shares_memory(segs[3].samples, rec.channels)
    np.testing.assert_array_equal(segs[3].samples, rec.channels[15:25].T)


def test_errors():
    rec = rec_1khz(np.ones(100, int))
    with pytest.raises(InputTooShortError):
        segment(rec, spec_for_samples(101, 1))
    with pytest.raises(SpecError, match="300"):
        segment(rec, WindowSpec(400, 10))
    with pytest.raises(SpecError):
        WindowSpec(0, 10)
    with pytest.raises(SpecError):
        WindowSpec(10, 20).validate(1000)
    with pytest.raises(SpecError):
        WindowSpec(0.4, 0.1).validate(2000)  # 0 samples of increment
    with pytest.raises(SpecError):
        AggregationSpec(0)


# ---------------------------------------------------------------- labeling

def brute_majority(values):
    vals, counts = np.unique(values, return_counts=True)
    return int(vals[np.argmax(counts)])


def test_label_policies_on_a_boundary():
    stim = np.array([1] * 6 + [2] * 4)
    rec = rec_1khz(stim)
    majority = segment(rec, spec_for_samples(4, 1))
    assert [s.label for s in majority] == [1, 1, 1, 1, 1, 2, 2]  # start 4 is a 2:2 tie
    endpoint = segment(rec, spec_for_samples(4, 1, policy=LabelPolicy.ENDPOINT))
    assert [s.label for s in endpoint] == [1, 1, 1, 2, 2, 2, 2]
    pure = segment(rec, spec_for_samples(4, 1, policy=LabelPolicy.PURE_ONLY))
    assert [s.window_index for s in pure] == [0, 1, 2, 6]


@pytest.mark.invariant
@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=20, max_size=200), st.integers(2, 20), st.integers(1, 20))
def test_labels_match_brute_force(stim, W, I):
    stim = np.array(stim)
    I = min(I, W)
    rep = np.array([(i // 7) % 4 for i in range(stim.size)])
    rec = rec_1khz(stim, rep)
    major = segment(rec, spec_for_samples(W, I))
    for s in major:
        window = stim[s.start_sample:s.start_sample + W]
        assert s.label == brute_majority(window)
        same = rep[s.start_sample:s.start_sample + W][window == s.label]
        assert s.repetition == brute_majority(same)
    pure = segment(rec, spec_for_samples(W, I, policy=LabelPolicy.PURE_ONLY))
    for s in pure:
        assert len(set(stim[s.start_sample:s.start_sample + W].tolist())) == 1
    assert {s.window_index for s in pure} <= {s.window_index for s in major}


# ------------------------------------------------------------- aggregation

def seg(t, values, label=1, rep=1):
    return Segment(t, t, np.asarray(values, dtype=float).reshape(1, -1), label, rep)


def test_aggregate_identical_segments():
    s = seg(0, [0.1, -2.5, 3.0])
    out = aggregate([s] * 5, AggregationSpec(5))
    assert len(out) == 1
    np.testing.assert_array_equal(out[0].samples, s.samples)


def test_aggregate_remainder_dropped():
    segs = [seg(t, [t]) for t in range(12)]
    out = aggregate(segs, AggregationSpec(5))
    assert len(out) == 2
    assert [o.samples[0, 0] for o in out] == [2.0, 7.0]


def test_aggregate_mean_of_one_to_five():
    out = aggregate([seg(t, [t + 1]) for t in range(5)], AggregationSpec(5))
    assert out[0].samples[0, 0] == 3.0


def test_aggregate_drops_mixed_groups_and_keeps_last_label():
    segs = [seg(t, [t], label=1 if t < 7 else 2, rep=t) for t in range(15)]
    out = aggregate(segs, AggregationSpec(5))
    assert [(o.label, o.repetition) for o in out] == [(1, 4), (2, 14)]


def test_sliding_aggregation():
    segs = [seg(t, [t]) for t in range(7)]
    out = aggregate(segs, AggregationSpec(5, sliding=True))
    assert [o.samples[0, 0] for o in out] == [2.0, 3.0, 4.0]


def test_aggregate_shape_mismatch():
    with pytest.raises(ShapeError):
        aggregate([seg(0, [1, 2]), seg(1, [1, 2, 3])], AggregationSpec(2))


@pytest.mark.invariant
@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=30), st.integers(1, 8))
def test_aggregation_laws(values, n):
    segs = [seg(t, [v, -v]) for t, v in enumerate(values)]
    same = aggregate(segs, AggregationSpec(1))
    assert all(a is b for a, b in zip(same, segs)) and len(same) == len(segs)
    copies = aggregate([segs[0]] * n, AggregationSpec(n))
    assert len(copies) == 1
    np.testing.assert_array_equal(copies[0].samples, segs[0].samples)
    assert len(aggregate(segs, AggregationSpec(n))) == len(values) // n


def test_aggregate_is_lazy():
    produced = iter_aggregate([seg(t, [t]) for t in range(10)], AggregationSpec(5))
    assert next(produced).samples[0, 0] == 2.0


# --------------------------------------------------------------- baselines

def test_baseline_specs_at_2khz():
    w, agg = make_baseline_spec("PROPOSED", 2000)
    assert w.validate(2000) == (512, 20) and agg is None
    w, agg = make_baseline_spec(Technique.WA, 2000)
    assert w.validate(2000) == (400, 20) and agg is None
    w, agg = make_baseline_spec("ag", 2000)
    assert w.validate(2000) == (512, 20) and agg == AggregationSpec(5)
    with pytest.raises(SpecError):
        make_baseline_spec("XX")


@pytest.mark.invariant
def test_segmentation_is_deterministic(small_recording):
    spec = WindowSpec(256, 10)
    a = segment(small_recording, spec)
    b = segment(small_recording, spec)
    assert [(s.start_sample, s.label, s.repetition) for s in a] == \
        [(s.start_sample, s.label, s.repetition) for s in b]
