import warnings

import numpy as np
import pytest

from rieszdre.data import ObservationalDataset, TwoSampleDataset

# criterion number -> (passed, detail), filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    prev = ACCEPTANCE.get(criterion)
    if prev is not None:
        passed = passed and prev[0]
        detail = f"{prev[1]}; {detail}"
    ACCEPTANCE[criterion] = (bool(passed), detail)


@pytest.fixture
def acceptance_record():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_obs():
    x = np.array([[0.1], [-0.3], [1.2], [0.7]])
    return ObservationalDataset(x, np.array([1.0, 0.0, 1.0, 0.0]), np.array([1.0, 2.0, 3.0, 4.0]))


@pytest.fixture
def obs_2d(rng):
    n = 60
    x = rng.standard_normal((n, 2))
    d = (rng.uniform(size=n) < 0.5).astype(float)
    d[:2] = [0.0, 1.0]
    y = x @ [1.0, -0.5] + d + 0.3 * rng.standard_normal(n)
    return ObservationalDataset(x, d, y)


@pytest.fixture
def two_sample(rng):
    return TwoSampleDataset(de=rng.standard_normal((40, 1)), nu=0.5 + rng.standard_normal((30, 1)))


@pytest.fixture(autouse=True)
def _quiet_numpy():
    with np.errstate(over="ignore"), warnings.catch_warnings():
        yield
