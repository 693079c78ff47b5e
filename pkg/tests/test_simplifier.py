import numpy as np
import pytest

from spectral_simplify.dataset_io import DataSet, generate_swiss_roll
from spectral_simplify.laplacian import DegenerateGeometryError, path_pair
from spectral_simplify.metrics import metric_report
from spectral_simplify.simplifier import SimplificationConfig, StopRule, hks_diag, simplify
from spectral_simplify.spectrum import dense_oracle


@pytest.fixture(scope="module")
def small_run():
    data = generate_swiss_roll(400, 0.0, 1)
    return data, simplify(data, SimplificationConfig(max_eigenvectors=8))


def test_stop_rule_parse():
    assert StopRule.parse("rate=0.2") == StopRule("rate", 0.2)
    assert str(StopRule.parse("dh=1.5")) == "dh=1.5"
    for bad in ("rate", "speed=1", "dkl=-1", "rate=x"):
        with pytest.raises(ValueError):
            StopRule.parse(bad)


def test_steps_are_nested(small_run):
    data, res = small_run
    assert [s.eigenvector_index for s in res.steps] == list(range(2, 10))
    prev = set()
    for s in res.steps:
        cur = set(s.subset)
        assert prev <= cur
        assert s.new_points == len(cur) - len(prev)
        prev = cur


def test_reports_match_recomputation(small_run):
    data, res = small_run
    s = res.steps[-1]
    assert metric_report(data, s.subset) == s.report
    assert np.all(np.diff(res.series("d_h")) <= 0)


def test_first_eigenvalue_zero(small_run):
    _, res = small_run
    assert abs(res.eigenvalues[0]) < 1e-12
    assert res.eigenvalues.size == 9


def test_stop_rule_halts():
    data = generate_swiss_roll(400, 0.0, 1)
    res = simplify(data, SimplificationConfig(max_eigenvectors=30, stop=StopRule("rate", 0.05)))
    assert res.stop_satisfied and not res.budget_exhausted
    assert res.steps[-1].report.rate >= 0.05
    assert all(s.report.rate < 0.05 for s in res.steps[:-1])


def test_budget_exhausted_flag():
    data = generate_swiss_roll(200, 0.0, 1)
    res = simplify(data, SimplificationConfig(max_eigenvectors=3, stop=StopRule("rate", 1.0)))
    assert res.budget_exhausted and not res.stop_satisfied
    assert len(res.steps) == 3
    assert any("budget exhausted" in w for w in res.warnings)


def test_small_k_skips_saddles():
    data = generate_swiss_roll(100, 0.0, 1)
    res = simplify(data, SimplificationConfig(k=2, max_eigenvectors=3))
    assert any("saddle detection skipped" in w for w in res.warnings)


def test_identical_points_rejected():
    with pytest.raises(DegenerateGeometryError):
        simplify(DataSet(np.ones((20, 3))), SimplificationConfig(k=3))


def test_deterministic():
    data = generate_swiss_roll(300, 0.05, 2)
    cfg = SimplificationConfig(max_eigenvectors=5)
    a, b = simplify(data, cfg), simplify(data, cfg)
    assert [list(s.subset) for s in a.steps] == [list(s.subset) for s in b.steps]


def test_hks_path_hand_sum():
    spec = dense_oracle(path_pair([1.0, 1.0]))
    expected = 0.25 + np.exp(-1.0) * np.array([0.5, 0.0, 0.5]) + np.exp(-2.0) * 0.25
    np.testing.assert_allclose(hks_diag(spec, 1.0), expected, rtol=1e-12)


def test_hks_large_t_limit():
    spec = dense_oracle(path_pair([1.0, 2.0, 0.5]))
    np.testing.assert_allclose(hks_diag(spec, 1e4), spec.vector(1) ** 2, rtol=1e-10)
    with pytest.raises(ValueError):
        hks_diag(spec, 0.0)
