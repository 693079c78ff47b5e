import numpy as np
import pytest

from spectral_simplify.dataset_io import DataSet, generate_swiss_roll
from spectral_simplify.knn import build_knn


@pytest.fixture
def line4():
    return DataSet(np.array([[0.0], [1.0], [2.0], [4.0]]))


@pytest.fixture
def line4_graph(line4):
    return build_knn(line4, k=1)


@pytest.fixture(scope="session")
def roll2000():
    return generate_swiss_roll(2000, 0.0, 0)


@pytest.fixture
def grid3():
    """3x3 unit grid with coordinates as points; k=8 makes every point see all others."""
    xs, ys = np.meshgrid([-1.0, 0.0, 1.0], [-1.0, 0.0, 1.0])
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    return DataSet(pts), build_knn(DataSet(pts), k=8)


ACCEPTANCE_RESULTS = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion; printed in the terminal summary."""
    def record(number, title, ok, detail):
        ACCEPTANCE_RESULTS.append((number, title, bool(ok), detail))
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} :: {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {number:>2}. {title} :: {detail}")
