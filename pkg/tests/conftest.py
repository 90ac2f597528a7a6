import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from emgpr.dataset import Recording, SyntheticSpec, generate_synthetic


@pytest.fixture(scope="session")
def small_spec():
    return SyntheticSpec(num_classes=3, num_repetitions=6, movement_duration_s=1.0,
                         rest_duration_s=0.5, num_channels=4, seed=3)


@pytest.fixture(scope="session")
def small_recording(small_spec):
    return generate_synthetic(small_spec)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_recording(stimulus, repetition=None, channels=1, rate=2000.0, seed=0):
    stimulus = np.asarray(stimulus)
    if repetition is None:
        repetition = np.where(stimulus > 0, 1, 0)
    data = np.random.default_rng(seed).standard_normal((stimulus.size, channels))
    return Recording(data, stimulus, np.asarray(repetition), sample_rate_hz=rate)


# one line per acceptance criterion, echoed again in the terminal summary
ACCEPTANCE_RESULTS = []


def record_criterion(number, passed, detail):
    status = {True: "PASS", False: "FAIL"}.get(passed, passed)
    line = f"criterion {number:>2}: {status} - {detail}"
    ACCEPTANCE_RESULTS.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_RESULTS, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
