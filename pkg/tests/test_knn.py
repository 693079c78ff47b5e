import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_simplify.dataset_io import DataSet
from spectral_simplify.knn import build_knn


def naive_knn(points, k):
    d2 = ((points[:, None, :] - points[None, :, :]) ** 2).sum(-1)
    out = []
    for i in range(len(points)):
        order = sorted((d2[i, j], j) for j in range(len(points)) if j != i)
        out.append([j for _, j in order[:k]])
    return np.array(out)


def test_line_example(line4_graph):
    assert line4_graph.indices[:, 0].tolist() == [1, 0, 1, 2]
    np.testing.assert_array_equal(line4_graph.sqdist[:, 0], [1, 1, 1, 4])


def test_neighbor_of(line4_graph):
    assert line4_graph.neighbor_of(1, 2)
    assert line4_graph.neighbor_of(2, 1)
    assert not line4_graph.neighbor_of(1, 1)
    assert not line4_graph.neighbor_of(0, 3)
    with pytest.raises(IndexError):
        line4_graph.neighbor_of(0, 9)


def test_complete_graph():
    data = DataSet(np.random.default_rng(0).standard_normal((6, 2)))
    g = build_knn(data, k=5)
    for i in range(6):
        assert sorted(g.indices[i]) == [j for j in range(6) if j != i]


@pytest.mark.parametrize("k", [0, 4])
def test_bad_k(line4, k):
    with pytest.raises(ValueError):
        build_knn(line4, k=k)


def test_adjacency_symmetric(roll2000):
    g = build_knn(roll2000, k=10)
    adj = g.adjacency
    assert (adj != adj.T).nnz == 0
    assert adj.diagonal().sum() == 0
    assert np.all(np.diff(adj.indptr) >= 10)


def test_threads_and_blocks_agree(roll2000):
    a = build_knn(roll2000, k=10, block_size=512)
    b = build_knn(roll2000, k=10, block_size=97, threads=3)
    np.testing.assert_array_equal(a.indices, b.indices)
    np.testing.assert_array_equal(a.sqdist, b.sqdist)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(5, 40), st.integers(1, 4), st.booleans())
def test_matches_naive(seed, n, d, lattice):
    rng = np.random.default_rng(seed)
    # integer lattice points force many exact distance ties
    pts = rng.integers(0, 4, (n, d)).astype(float) if lattice else rng.standard_normal((n, d))
    k = min(4, n - 1)
    g = build_knn(DataSet(pts), k=k, block_size=7)
    np.testing.assert_array_equal(g.indices, naive_knn(pts, k))


def test_write_edges(tmp_path, line4_graph):
    p = tmp_path / "e.csv"
    line4_graph.write_edges(p)
    lines = p.read_text().splitlines()
    assert lines[0] == "i,j,squared_distance"
    assert lines[1:] == ['0,1,1.0', '1,0,1.0', '2,1,1.0', '3,2,4.0']
