"""Exact k-nearest-neighbor graph by blocked brute force."""
from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .dataset_io import DataSet, fmt

DEFAULT_K = 10

# Relative slack on the expanded-form squared distance. Candidates inside the
# slack are re-measured exactly so rounding in |x|^2 + |y|^2 - 2x.y never
# changes which neighbors are selected.
_REL_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class NeighborGraph:
    """Per-point neighbor lists, ``indices[i]`` sorted by (squared distance, index)."""

    indices: np.ndarray
    sqdist: np.ndarray

    @property
    def n(self) -> int:
        return self.indices.shape[0]

    @property
    def k(self) -> int:
        return self.indices.shape[1]

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric boolean adjacency: i ~ j iff either lists the other."""
        rows = np.repeat(np.arange(self.n), self.k)
        a = sp.csr_matrix((np.ones(rows.size, dtype=bool), (rows, self.indices.ravel())),
                          shape=(self.n, self.n))
        sym = (a + a.T).tocsr()
        sym.sort_indices()
        return sym

    @cached_property
    def edge_sqdist(self) -> sp.csr_matrix:
        """Symmetric squared distances on the symmetric adjacency pattern."""
        rows = np.repeat(np.arange(self.n), self.k)
        cols = self.indices.ravel()
        vals = self.sqdist.ravel()
        # an edge listed from both ends carries the same exactly-computed value
        # both times; keep one copy per direction
        r = np.concatenate([rows, cols])
        c = np.concatenate([cols, rows])
        v = np.concatenate([vals, vals])
        key = r * self.n + c
        _, first = np.unique(key, return_index=True)
        m = sp.csr_matrix((v[first], (r[first], c[first])), shape=(self.n, self.n))
        m.sort_indices()
        return m

    def neighborhood(self, i: int) -> np.ndarray:
        adj = self.adjacency
        return adj.indices[adj.indptr[i]:adj.indptr[i + 1]]

    def neighbor_of(self, i: int, j: int) -> bool:
        for v in (i, j):
            if not 0 <= v < self.n:
                raise IndexError(f"index {v} out of range for {self.n} points")
        if i == j:
            return False
        return bool(j in self.neighborhood(i))

    def write_edges(self, path) -> None:
        """Dump the directed KNN lists as ``i,j,squared_distance`` rows."""
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["i", "j", "squared_distance"])
            for i in range(self.n):
                for j, d2 in zip(self.indices[i], self.sqdist[i]):
                    w.writerow([i, int(j), fmt(d2)])


def exact_sqdist(x: np.ndarray, ys: np.ndarray) -> np.ndarray:
    diff = ys - x
    return np.einsum("ij,ij->i", diff, diff)


def _knn_block(points, sqnorm, start, stop, k):
    n = points.shape[0]
    q = points[start:stop]
    approx = sqnorm[start:stop, None] + sqnorm[None, :] - 2.0 * (q @ points.T)
    rows = np.arange(stop - start)
    approx[rows, rows + start] = np.inf
    kth = np.partition(approx, k - 1, axis=1)[:, k - 1]
    slack = _REL_SLACK * (sqnorm[start:stop] + sqnorm.max()) + 1e-300
    out_idx = np.empty((stop - start, k), dtype=np.int64)
    out_d2 = np.empty((stop - start, k), dtype=np.float64)
    for r in rows:
        cand = np.flatnonzero(approx[r] <= kth[r] + 2 * slack[r])
        d2 = exact_sqdist(q[r], points[cand])
        order = np.lexsort((cand, d2))[:k]
        out_idx[r] = cand[order]
        out_d2[r] = d2[order]
    return out_idx, out_d2


def build_knn(data: DataSet, k: int = DEFAULT_K, block_size: int = 512,
              threads: int = 1) -> NeighborGraph:
    """Exact k nearest neighbors of every point, excluding itself.

    Ties in distance go to the lower index. Results do not depend on
    ``block_size`` or ``threads``.
    """
    pts = data.points
    n = pts.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in [1, n-1] = [1, {n - 1}], got {k}")
    sqnorm = np.einsum("ij,ij->i", pts, pts)
    starts = list(range(0, n, block_size))
    job = lambda s: _knn_block(pts, sqnorm, s, min(s + block_size, n), k)  # noqa: E731
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(job, starts))
    else:
        parts = [job(s) for s in starts]
    idx = np.vstack([p[0] for p in parts])
    d2 = np.vstack([p[1] for p in parts])
    idx.setflags(write=False)
    d2.setflags(write=False)
    return NeighborGraph(idx, d2)
