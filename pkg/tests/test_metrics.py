import math

import numpy as np
import pytest

from spectral_simplify.dataset_io import DataSet, IndexSubset, generate_swiss_roll
from spectral_simplify.metrics import (cov_det_metric, hausdorff, kl_metric, metric_report, normalize_series,
                                       simplification_rate, smoothed_histogram)


def all_rows(data):
    return IndexSubset(np.arange(data.n))


def test_identity_is_exactly_zero():
    data = generate_swiss_roll(500, 0.1, 5)
    rows = all_rows(data)
    assert kl_metric(data, rows) == 0.0
    assert hausdorff(data, rows) == 0.0
    assert cov_det_metric(data, rows)[0] == 0.0


def test_kl_two_bins():
    data = DataSet([[0.0], [0.0], [1.0], [1.0]])
    # P = (2.5/5, 2.5/5); Q from two zeros: (2.5/3, 0.5/3)
    q1, q2 = 2.5 / 3, 0.5 / 3
    expected = 0.5 * math.log(0.5 / q1) + 0.5 * math.log(0.5 / q2)
    assert expected == pytest.approx(0.5 * math.log(1.8), rel=1e-15)
    assert kl_metric(data, IndexSubset([0, 1]), bins=2) == pytest.approx(expected, rel=1e-12)


def test_smoothed_histogram_sums_to_one():
    h = smoothed_histogram(np.random.default_rng(1).random((40, 3)), 7)
    np.testing.assert_allclose(h.sum(axis=1), 1.0, rtol=1e-14)
    assert np.all(h > 0)


def test_histogram_top_edge_in_last_cell():
    h = smoothed_histogram(np.array([1.0]), 4)
    assert np.argmax(h) == 3


def test_kl_root_sum_square():
    a = DataSet([[0.0], [0.0], [1.0], [1.0]])
    two = DataSet([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [1.0, 1.0]])
    s = IndexSubset([0, 1])
    assert kl_metric(two, s, 2) == pytest.approx(math.sqrt(2) * kl_metric(a, s, 2), rel=1e-14)


def test_hausdorff_hand():
    data = DataSet([[0.0], [1.0], [2.0]])
    assert hausdorff(data, IndexSubset([0, 2])) == pytest.approx(1.0, abs=1e-12)


def test_hausdorff_matches_brute_force():
    data = generate_swiss_roll(700, 0.2, 9)
    rows = IndexSubset(np.sort(np.random.default_rng(0).choice(700, 40, replace=False)))
    S = data.take(rows)
    d = np.sqrt(((data.points[:, None, :] - S[None, :, :]) ** 2).sum(-1)).min(axis=1).max()
    assert hausdorff(data, rows, block_size=64) == pytest.approx(d, rel=1e-12)


def test_cov_hand():
    data = DataSet([[0.0], [1.0], [2.0], [3.0]])
    d, lh, ls = cov_det_metric(data, IndexSubset([0, 3]))
    assert d == pytest.approx(1.0, abs=1e-12)
    assert lh == pytest.approx(math.log(1.25), abs=1e-12)
    assert ls == pytest.approx(math.log(2.25), abs=1e-12)


def test_cov_singular_reports_sentinel():
    data = DataSet([[0.0, 1.0], [1.0, 1.0], [2.0, 1.0]])
    d, lh, _ = cov_det_metric(data, IndexSubset([0, 2]))
    assert d == 0.0 and lh == -math.inf


def test_cov_needs_two_rows():
    with pytest.raises(ValueError):
        cov_det_metric(DataSet([[0.0], [1.0]]), IndexSubset([0]))


def test_rate():
    data = DataSet(np.zeros((2000, 1)))
    assert simplification_rate(data, IndexSubset(np.arange(397))) == 0.1985
    assert simplification_rate(data, all_rows(data)) == 1.0
    assert simplification_rate(data, IndexSubset()) == 0.0


def test_normalize_series():
    np.testing.assert_array_equal(normalize_series([2, 1, 0]), [1, 0.5, 0])
    np.testing.assert_array_equal(normalize_series([0, 0]), [0, 0])
    np.testing.assert_array_equal(normalize_series([5]), [1])
    with pytest.raises(ValueError):
        normalize_series([])


def test_report_tiny_subsets():
    data = DataSet([[0.0], [1.0], [2.0]])
    one = metric_report(data, IndexSubset([1]))
    assert math.isnan(one.d_cov) and one.d_h == 1.0
    empty = metric_report(data, IndexSubset())
    assert empty.rate == 0.0 and math.isnan(empty.d_kl)
