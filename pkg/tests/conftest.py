import numpy as np
import pytest

from recdiag.linalg import Dataset

_ACCEPTANCE = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_dataset(rng, n, p, intercept=True):
    k = p - 1 if intercept else p
    X = rng.normal(size=(n, k))
    y = X @ rng.normal(size=k) + rng.normal(size=n) + (1.5 if intercept else 0.0)
    return Dataset.from_arrays(X, y, intercept=intercept)


@pytest.fixture
def acceptance_report():
    def record(criterion, passed, detail):
        _ACCEPTANCE.append((criterion, bool(passed), detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")
