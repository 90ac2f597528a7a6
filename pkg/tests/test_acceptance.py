"""Acceptance gates for the whole pipeline.

Each test checks one numbered criterion at its stated tolerance and records a
single PASS/FAIL line, repeated in the pytest terminal summary.  Criterion 10
needs a real recording and only runs when ``EMGPR_DB2_S1_CSV`` points at a CSV
export of that subject's first exercise.
"""
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

import oracles
from conftest import make_recording, record_criterion
from emgpr.classifiers import CLASSIFIERS, train
from emgpr.cli import RunConfig, benchmark_latency, evaluate_subject
from emgpr.dataset import SplitSpec, SyntheticSpec, generate_synthetic, load_recording
from emgpr.features import hist, mav, mavs, preset, rms, ssc, wl, zc
from emgpr.windowing import AggregationSpec, Segment, WindowSpec, aggregate, segment

ROOT = Path(__file__).resolve().parents[1]
SEED = 7
REFERENCE_ACCURACY = 98.3  # kNN, C1, first subject of the able-bodied database


def close(a, b):
    return abs(a - b) <= 1e-9 * max(abs(a), abs(b)) + 1e-12


def random_window(rng, m):
    kind = rng.integers(4)
    if kind == 0:
        return rng.standard_normal(m) * rng.uniform(1e-3, 1e3)
    if kind == 1:
        return rng.integers(-3, 4, m).astype(float)
    if kind == 2:
        return rng.standard_cauchy(m)
    return np.sin(np.arange(m) * rng.uniform(0.01, 2.0)) + 0.01 * rng.standard_normal(m)


@pytest.fixture(scope="module")
def synthetic_config():
    return RunConfig(synthetic=SyntheticSpec(seed=SEED), configs=("C1",), classifiers=("knn",),
                     split=SplitSpec.parse("1,3,4,6", "2,5"))


@pytest.fixture(scope="module")
def synthetic_recording(synthetic_config):
    return generate_synthetic(synthetic_config.synthetic)


@pytest.fixture(scope="module")
def proposed_run(synthetic_config):
    t0 = time.perf_counter()
    rec = generate_synthetic(synthetic_config.synthetic)
    (report,) = evaluate_subject(rec, synthetic_config)
    return report, time.perf_counter() - t0


def test_criterion_1_feature_oracles():
    rng = np.random.default_rng(1)
    windows = [random_window(rng, int(rng.integers(2, 1025))) for _ in range(1000)]
    t0 = time.perf_counter()
    got = [(mav(x), mavs(x), wl(x), ssc(x), zc(x), hist(x), rms(x)) for x in windows]
    elapsed = time.perf_counter() - t0
    bad = 0
    for x, (a, s, w, sc, z, h, r) in zip(windows, got):
        xs = x.tolist()
        ok = (close(float(a), oracles.mav(xs)) and close(float(s), oracles.mavs(xs))
              and close(float(w), oracles.wl(xs)) and close(float(r), oracles.rms(xs))
              and int(sc) == oracles.ssc(xs) and int(z) == oracles.zc(xs)
              and h.tolist() == oracles.hist(xs))
        bad += not ok
    passed = bad == 0 and elapsed < 10.0
    record_criterion(1, passed, f"{1000 - bad}/1000 windows match the oracles; features took {elapsed:.2f}s")
    assert passed


def test_criterion_2_dimensions():
    expected = {"C1": 312, "C2": 12, "C4": 24, "C5": 36, "C6": 24, "C7": 72}
    got = {name: preset(name).num_columns(12) for name in expected}
    passed = got == expected
    record_criterion(2, passed, " ".join(f"{k}={v}" for k, v in got.items()))
    assert passed


def test_criterion_3_window_count_law():
    rng = np.random.default_rng(3)
    mismatches = 0
    for _ in range(200):
        W = int(rng.integers(2, 401))
        L = int(rng.integers(W, 2001))
        I = int(rng.integers(1, W + 1))
        rec = make_recording(np.ones(L, int), rate=1000.0)
        segs = segment(rec, WindowSpec(float(W), float(I), latency_limit_ms=None))
        mismatches += [s.start_sample for s in segs] != oracles.window_starts(L, W, I)
    sizes = WindowSpec(256, 10).validate(2000)
    passed = mismatches == 0 and sizes == (512, 20)
    record_criterion(3, passed, f"{200 - mismatches}/200 triples match enumeration; 256ms/10ms at 2kHz -> W,I={sizes}")
    assert passed


def test_criterion_4_aggregation_law():
    rng = np.random.default_rng(4)
    segs = [Segment(t, t, rng.standard_normal((3, 8)), 1, 1) for t in range(12)]
    identity = aggregate(segs, AggregationSpec(1))
    ok_identity = len(identity) == 12 and all(np.array_equal(a.samples, b.samples) for a, b in zip(identity, segs))
    copies = aggregate([segs[0]] * 5, AggregationSpec(5))
    ok_copies = len(copies) == 1 and np.array_equal(copies[0].samples, segs[0].samples)
    count = len(aggregate(segs, AggregationSpec(5)))
    passed = ok_identity and ok_copies and count == 2
    record_criterion(4, passed, f"identity={ok_identity} self-average={ok_copies} 12 segments/n=5 -> {count}")
    assert passed


def test_criterion_5_synthetic_end_to_end(proposed_run):
    report, elapsed = proposed_run
    passed = report.accuracy_pct >= 95.0 and elapsed < 60.0
    record_criterion(5, passed, f"PROPOSED C1 kNN accuracy {report.accuracy_pct:.2f}% "
                                f"({report.n_train} train / {report.n_test} test rows) in {elapsed:.1f}s")
    assert passed


def test_criterion_6_proposed_vs_aggregation(proposed_run, synthetic_config, synthetic_recording):
    proposed = proposed_run[0].accuracy_pct
    config = RunConfig(**{**synthetic_config.__dict__, "techniques": ("AG",)})
    (ag,) = evaluate_subject(synthetic_recording, config)
    passed = proposed >= ag.accuracy_pct - 1.0
    record_criterion(6, passed, f"PROPOSED {proposed:.2f}% vs AG {ag.accuracy_pct:.2f}%")
    assert passed


def test_criterion_7_classifier_sanity():
    X4 = np.array([[0.0, 0.0], [0.0, 1.0], [5.0, 5.0], [5.0, 6.0]])
    y4 = np.array([3, 3, 7, 7])
    rng = np.random.default_rng(7)

    def draw():
        X = np.vstack([rng.normal(-10, 1, (100, 2)), rng.normal(10, 1, (100, 2))])
        return X, np.repeat([1, 2], 100)

    X, y = draw()
    Xq, yq = draw()
    details, passed = [], True
    for kind in sorted(CLASSIFIERS):
        # four rows cannot support the default k=5, so the small set uses k=3
        four = np.mean(train(kind, X4, y4, **({"k": 3} if kind == "knn" else {})).predict(X4) == y4)
        blobs = np.mean(train(kind, X, y).predict(Xq) == yq)
        passed &= four == 1.0 and blobs >= 0.99
        details.append(f"{kind} {100 * four:.0f}%/{100 * blobs:.1f}%")
    record_criterion(7, passed, "four-point/blobs: " + ", ".join(details))
    assert passed


def test_criterion_8_invariant_suites():
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-m", "invariant", "-p", "no:cacheprovider",
                           str(ROOT / "tests")], cwd=ROOT, capture_output=True, text=True)
    elapsed = time.perf_counter() - t0
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-200:]
    passed = proc.returncode == 0 and elapsed < 30.0
    record_criterion(8, passed, f"'pytest -m invariant': {summary} ({elapsed:.1f}s wall)")
    assert passed, proc.stdout[-3000:]


def test_criterion_9_latency(synthetic_config):
    stats = benchmark_latency(synthetic_config, trials=200, max_train_rows=20000)
    passed = stats.verdict == "PASS" and stats.total_ms < 10.0 and stats.n_train_rows <= 20000
    record_criterion(9, passed, f"median {stats.total_ms:.3f}ms per 512x12 window "
                                f"(extract {stats.extract_ms:.3f} + predict {stats.predict_ms:.3f}) "
                                f"with {stats.n_train_rows} training rows")
    assert passed


def test_criterion_10_real_data():
    path = os.environ.get("EMGPR_DB2_S1_CSV")
    if not path:
        record_criterion(10, "SKIP", "set EMGPR_DB2_S1_CSV to a CSV export of subject 1, exercise 1")
        pytest.skip("no real recording supplied")
    rec = load_recording(path, expected_channels=12, subject_id=1)
    (report,) = evaluate_subject(rec, RunConfig(inputs=[Path(path)], configs=("C1",), classifiers=("knn",)))
    gap = report.accuracy_pct - REFERENCE_ACCURACY
    verdict = "consistent" if abs(gap) <= 5.0 else "not within 5 points"
    # informational only: the published split is unknown
    record_criterion(10, "INFO", f"PROPOSED C1 kNN {report.accuracy_pct:.2f}% vs published "
                                 f"{REFERENCE_ACCURACY}% ({gap:+.2f}; {verdict})")
