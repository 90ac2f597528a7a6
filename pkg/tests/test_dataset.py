import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emgpr.dataset import (
    Recording,
    SplitSpec,
    SyntheticSpec,
    generate_synthetic,
    load_recording,
    split_by_repetition,
    write_recording,
)
from emgpr.errors import (
    ChannelCountError,
    DataError,
    FormatError,
    ParseError,
    SpecError,
    SplitError,
    ValidationError,
)
from emgpr.features import ColumnMeta, FeatureKind, FeatureMatrix


def write_csv(path, rows, channels):
    header = ["sample_index"] + [f"ch{i}" for i in range(1, channels + 1)] + ["stimulus", "repetition"]
    path.write_text("\n".join([",".join(header)] + [",".join(map(str, r)) for r in rows]) + "\n")
    return path


# ------------------------------------------------------------------ loading

def test_load_three_rows_twelve_channels(tmp_path):
    rows = [[i] + [0.25 * (i + c) for c in range(12)] + [s, r]
            for i, (s, r) in enumerate([(0, 0), (1, 1), (1, 1)])]
    rec = load_recording(write_csv(tmp_path / "a.csv", rows, 12))
    assert rec.num_samples == 3 and rec.num_channels == 12
    assert rec.stimulus.tolist() == [0, 1, 1]
    assert rec.repetition.tolist() == [0, 1, 1]
    assert rec.channels[2, 11] == 0.25 * 13


def test_channel_count_mismatch(tmp_path):
    rows = [[0] + [0.0] * 11 + [0, 0]]
    path = write_csv(tmp_path / "a.csv", rows, 11)
    with pytest.raises(ChannelCountError):
        load_recording(path, expected_channels=12)
    assert load_recording(path).num_channels == 11


def test_ragged_row_names_the_row(tmp_path):
    path = tmp_path / "a.csv"
    path.write_text("sample_index,ch1,stimulus,repetition\n0,1.0,0,0\n1,2.0,0\n")
    with pytest.raises(FormatError, match="row 2"):
        load_recording(path)


def test_non_numeric_voltage_is_a_parse_error(tmp_path):
    path = tmp_path / "a.csv"
    path.write_text("sample_index,ch1,stimulus,repetition\n0,1.0,0,0\n1,abc,0,0\n2,1.0,0,0\n")
    with pytest.raises(ParseError, match="row 2"):
        load_recording(path)


@pytest.mark.parametrize("body, error", [
    ("sample_index,ch1,stimulus,repetition\n0,nan,0,0\n", ParseError),
    ("sample_index,ch1,stimulus,repetition\n0,1.0,0.5,0\n", ParseError),
    ("sample_index,ch1,stimulus,repetition\n0,1.0,-1,0\n", ParseError),
    ("sample_index,ch1,stimulus,repetition\n1,1.0,0,0\n", FormatError),
    ("sample_index,ch2,stimulus,repetition\n0,1.0,0,0\n", FormatError),
    ("idx,ch1,stimulus,repetition\n0,1.0,0,0\n", FormatError),
    ("sample_index,ch1,stimulus,repetition\n", FormatError),
    ("", FormatError),
])
def test_malformed_files(tmp_path, body, error):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(error):
        load_recording(path)


def test_error_taxonomy():
    assert issubclass(ChannelCountError, DataError)
    assert issubclass(SpecError, ValidationError)
    assert issubclass(DataError, ValueError) and issubclass(ValidationError, ValueError)


def test_recording_is_read_only():
    rec = Recording(np.zeros((4, 2)), [0, 1, 1, 0], [0, 1, 1, 0])
    with pytest.raises(ValueError):
        rec.channels[0, 0] = 1.0


@pytest.mark.invariant
def test_write_load_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(5)
    data = rng.standard_normal((500, 3)) * 10.0 ** rng.integers(-300, 300, (500, 3))
    data[0, 0] = -0.0
    data[1, 1] = 5e-324
    rec = Recording(data, rng.integers(0, 4, 500), rng.integers(0, 7, 500))
    path = tmp_path / "r.csv"
    write_recording(rec, path)
    back = load_recording(path)
    assert back.equals(rec)
    # writing the reloaded recording reproduces the file byte for byte
    path2 = tmp_path / "r2.csv"
    write_recording(back, path2)
    assert path.read_bytes() == path2.read_bytes()


@pytest.mark.slow
def test_million_row_synthetic_export_round_trip(tmp_path):
    spec = SyntheticSpec(num_classes=25, num_repetitions=5, movement_duration_s=2.5,
                         rest_duration_s=1.5, num_channels=12, seed=11)
    rec = generate_synthetic(spec)
    assert rec.num_samples == 1_000_000
    path = tmp_path / "big.csv"
    write_recording(rec, path)
    assert load_recording(path).equals(rec)


# ---------------------------------------------------------------- synthetic

def test_synthetic_length_small():
    spec = SyntheticSpec(num_classes=2, num_repetitions=1, movement_duration_s=1.0, rest_duration_s=1.0)
    assert generate_synthetic(spec).num_samples == 2 * (2000 + 2000) == 8000


def test_synthetic_length_full_protocol():
    assert SyntheticSpec().total_samples == 6 * 17 * (5 + 3) * 2000 == 1_632_000


@pytest.mark.invariant
def test_synthetic_determinism(small_spec):
    assert generate_synthetic(small_spec).equals(generate_synthetic(small_spec))
    other = generate_synthetic(SyntheticSpec(**{**small_spec.__dict__, "seed": small_spec.seed + 1}))
    assert not other.equals(generate_synthetic(small_spec))


@pytest.mark.invariant
def test_synthetic_label_accounting(small_spec, small_recording):
    per_class = small_spec.num_repetitions * small_spec.movement_samples
    for k in range(1, small_spec.num_classes + 1):
        assert np.count_nonzero(small_recording.stimulus == k) == per_class
    assert set(np.unique(small_recording.repetition)) == set(range(0, small_spec.num_repetitions + 1))
    # rest samples carry repetition 0 and movement samples a positive repetition
    assert np.array_equal(small_recording.stimulus == 0, small_recording.repetition == 0)


@pytest.mark.parametrize("kwargs", [
    {"num_classes": 1}, {"num_repetitions": 0}, {"movement_duration_s": 0.0},
    {"rest_duration_s": -1.0}, {"num_channels": 0}, {"noise_level": -0.1},
])
def test_invalid_synthetic_spec(kwargs):
    with pytest.raises(SpecError):
        SyntheticSpec(**kwargs)


def test_rest_attachment():
    rec = Recording(np.zeros(8), [0, 1, 1, 0, 0, 2, 2, 0], [0, 1, 1, 0, 0, 2, 2, 0])
    assert rec.with_rest_attached().repetition.tolist() == [1, 1, 1, 1, 1, 2, 2, 2]


# -------------------------------------------------------------------- split

def rows_with_reps(reps):
    reps = np.asarray(reps)
    values = np.arange(reps.size, dtype=float)[:, None]
    return FeatureMatrix(values, [ColumnMeta(0, FeatureKind.MAV)], np.ones(reps.size, int), reps)


def test_split_examples():
    train, test = split_by_repetition(rows_with_reps([1, 2, 3, 4, 5, 6]), SplitSpec())
    assert len(train) == 4 and len(test) == 2
    assert sorted(test.repetitions.tolist()) == [2, 5]
    rng = np.random.default_rng(0)
    reps = rng.permutation(np.repeat(np.arange(1, 7), 100))
    train, test = split_by_repetition(rows_with_reps(reps), SplitSpec())
    assert (len(train), len(test)) == (400, 200)


def test_split_validation():
    with pytest.raises(SpecError):
        SplitSpec(frozenset({1}), frozenset({1}))
    with pytest.raises(SpecError):
        SplitSpec(frozenset(), frozenset({1}))
    with pytest.raises(SpecError):
        SplitSpec.parse("1,x", "2")
    assert SplitSpec.parse("1,3,4,6", "2,5") == SplitSpec()
    with pytest.raises(SplitError):
        split_by_repetition(rows_with_reps([1, 1, 3]), SplitSpec.parse("1,3", "2"))
    with pytest.raises(SpecError):
        split_by_repetition(rows_with_reps([1, 2, 3]), SplitSpec.parse("1,3,4", "2"))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 6), min_size=1, max_size=60),
       st.sets(st.integers(1, 6), min_size=1, max_size=5))
@pytest.mark.invariant
def test_split_is_a_disjoint_partition(reps, train_set):
    test_set = set(range(1, 7)) - train_set
    present = set(reps)
    if not (train_set & present) or not (test_set & present) or not (train_set | test_set) <= present:
        return
    rows = rows_with_reps(reps)
    train, test = split_by_repetition(rows, SplitSpec(frozenset(train_set), frozenset(test_set)))
    ids_train = set(train.values[:, 0].tolist())
    ids_test = set(test.values[:, 0].tolist())
    assert not ids_train & ids_test
    assert ids_train | ids_test <= set(range(len(reps)))
    assert len(train) + len(test) == len(reps)
    # order is preserved within each part
    assert train.values[:, 0].tolist() == sorted(ids_train)
