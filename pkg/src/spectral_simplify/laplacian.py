"""Heat-kernel weighted graph Laplacian pencil (W, A)."""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .dataset_io import DataSet, fmt
from .knn import NeighborGraph

# exp(-745) is the last double above zero
_UNDERFLOW = 745.0


class DegenerateGeometryError(ValueError):
    pass


class DisconnectedGraphWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class LaplacianPair:
    """Sparse symmetric ``W`` (zero row sums) and the diagonal mass ``A = diag(W)``."""

    W: sp.csr_matrix
    A: np.ndarray
    t: float
    n_components: int = 1
    warnings: tuple = field(default=())

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def write_coo(self, path) -> None:
        """Dump W as ``i,j,value`` triplets (row-major order)."""
        coo = self.W.tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["i", "j", "value"])
            for p in order:
                w.writerow([int(coo.row[p]), int(coo.col[p]), fmt(coo.data[p])])


def choose_bandwidth(graph: NeighborGraph, data: DataSet | None = None) -> float:
    """Median over points of the squared distance to the k-th neighbor."""
    kth = graph.sqdist[:, -1]
    t = float(np.median(kth))
    if t > 0:
        return t
    positive = graph.sqdist[graph.sqdist > 0]
    if positive.size:
        return float(np.median(positive))
    # every neighbor coincides with its query point
    if data is not None and np.ptp(data.points, axis=0).max() > 0:
        return 1.0
    raise DegenerateGeometryError("all neighbor distances are zero; bandwidth undefined")


def path_pair(weights) -> LaplacianPair:
    """Pencil of a weighted path graph, handy for tests and examples."""
    w = np.asarray(weights, dtype=np.float64)
    n = w.size + 1
    off = sp.diags([-w, -w], [-1, 1], shape=(n, n))
    deg = np.asarray(-off.sum(axis=1)).ravel()
    W = (off + sp.diags(deg)).tocsr()
    return LaplacianPair(W, deg, float("inf"))


def from_dense(W) -> LaplacianPair:
    """Wrap an explicit symmetric weight matrix; ``A`` is taken from its diagonal."""
    W = np.asarray(W, dtype=np.float64)
    if not np.array_equal(W, W.T):
        raise ValueError("W must be symmetric")
    A = np.diag(W).copy()
    if np.any(A <= 0):
        raise ValueError("diagonal of W must be positive")
    Ws = sp.csr_matrix(W)
    ncomp, _ = connected_components(Ws, directed=False)
    return LaplacianPair(Ws, A, float("nan"), ncomp)


def build_laplacian(data: DataSet, graph: NeighborGraph, t: float) -> LaplacianPair:
    """Assemble W and A from the symmetric KNN adjacency.

    Off-diagonal ``W[i, j] = -exp(-|v_i - v_j|^2 / t)`` on every symmetric edge,
    ``W[i, i]`` is minus the off-diagonal row sum and ``A[i] = W[i, i]``.
    """
    if not t > 0:
        raise ValueError("bandwidth t must be positive")
    if graph.n != data.n:
        raise ValueError("graph and data disagree on the point count")
    d2 = graph.edge_sqdist.tocoo()
    scaled = d2.data / t
    keep = scaled <= _UNDERFLOW
    rows, cols = d2.row[keep], d2.col[keep]
    vals = -np.exp(-scaled[keep])
    n = graph.n
    off = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    off.sum_duplicates()
    diag = -np.asarray(off.sum(axis=1)).ravel()
    if np.any(diag <= 0):
        bad = int(np.flatnonzero(diag <= 0)[0])
        raise DegenerateGeometryError(
            f"point {bad} has no surviving edges; bandwidth t={t} is too small")
    W = (off + sp.diags(diag, format="csr")).tocsr()
    W.sort_indices()
    notes = []
    ncomp, _ = connected_components(off, directed=False)
    if ncomp > 1:
        msg = f"neighbor graph is disconnected ({ncomp} components); zero eigenvalue has multiplicity {ncomp}"
        warnings.warn(msg, DisconnectedGraphWarning, stacklevel=2)
        notes.append(msg)
    A = diag.copy()
    A.setflags(write=False)
    return LaplacianPair(W, A, float(t), ncomp, tuple(notes))
