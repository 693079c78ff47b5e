import math
import warnings

import numpy as np
import pytest

from spectral_simplify.dataset_io import DataSet, generate_swiss_roll
from spectral_simplify.knn import build_knn
from spectral_simplify.laplacian import (DegenerateGeometryError, DisconnectedGraphWarning, build_laplacian,
                                         choose_bandwidth, path_pair)


def test_bandwidth_line(line4, line4_graph):
    assert choose_bandwidth(line4_graph, line4) == 1.0


def test_bandwidth_scales_quadratically():
    data = generate_swiss_roll(300, 0.0, 2)
    scaled = DataSet(data.points * 3.0)
    t1 = choose_bandwidth(build_knn(data, 10))
    t3 = choose_bandwidth(build_knn(scaled, 10))
    assert t3 == pytest.approx(9.0 * t1, rel=1e-12)


def test_bandwidth_identical_points():
    data = DataSet(np.ones((5, 2)))
    with pytest.raises(DegenerateGeometryError):
        choose_bandwidth(build_knn(data, 2), data)


def test_two_point_pair():
    data = DataSet([[0.0], [1.0]])
    pair = build_laplacian(data, build_knn(data, 1), 1.0)
    e = math.exp(-1.0)
    np.testing.assert_allclose(pair.W.toarray(), [[e, -e], [-e, e]], rtol=1e-15)
    np.testing.assert_allclose(pair.A, [e, e], rtol=1e-15)


def test_path_limit():
    pair = path_pair([1.0, 1.0])
    np.testing.assert_array_equal(pair.W.toarray(), [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])
    np.testing.assert_array_equal(pair.A, [1, 2, 1])


def test_large_t_approaches_path_limit():
    data = DataSet([[0.0], [1.0], [2.0]])
    pair = build_laplacian(data, build_knn(data, 1), 1e12)
    np.testing.assert_allclose(pair.W.toarray(), path_pair([1.0, 1.0]).W.toarray(), atol=1e-11)


def test_row_sums_zero_and_symmetric(roll2000):
    g = build_knn(roll2000, 10)
    pair = build_laplacian(roll2000, g, choose_bandwidth(g))
    W = pair.W
    assert (W - W.T).nnz == 0
    np.testing.assert_allclose(np.asarray(W.sum(axis=1)).ravel(), 0.0, atol=1e-13)
    assert np.all(pair.A > 0)
    assert pair.n_components == 1 and pair.warnings == ()


def test_disconnected_warns():
    pts = np.array([[0.0], [1.0], [2.0], [100.0], [101.0], [102.0]])
    data = DataSet(pts)
    with pytest.warns(DisconnectedGraphWarning):
        pair = build_laplacian(data, build_knn(data, 2), 1.0)
    assert pair.n_components == 2
    assert "disconnected" in pair.warnings[0]


def test_tiny_bandwidth_fails():
    data = DataSet([[0.0], [1.0], [2.0]])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(DegenerateGeometryError):
            build_laplacian(data, build_knn(data, 1), 1e-6)


def test_write_coo(tmp_path):
    p = tmp_path / "w.csv"
    path_pair([1.0, 1.0]).write_coo(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "i,j,value"
    assert lines[1:4] == ["0,0,1.0", "0,1,-1.0", "1,0,-1.0"]
