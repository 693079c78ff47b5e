"""Local maxima, minima and saddles of a scalar field on a neighbor graph.

Neighborhoods are the symmetric KNN adjacency. Extrema use strict
comparisons, so plateaus yield nothing. Saddles are found by ordering each
point's neighbors counter-clockwise in a planar projection and counting sign
changes of ``field[x] >= field[neighbor]`` around the cyclic ring.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .dataset_io import IndexSubset
from .knn import NeighborGraph
from .spectrum import Spectrum

MIN_SADDLE_K = 4


@dataclass(frozen=True, eq=False)
class FeatureClassification:
    maxima: IndexSubset
    minima: IndexSubset
    saddles: IndexSubset

    def all(self) -> IndexSubset:
        return self.maxima.union(self.minima).union(self.saddles)

    def write_csv(self, path) -> None:
        labels = [(i, "max") for i in self.maxima] + [(i, "min") for i in self.minima] \
            + [(i, "saddle") for i in self.saddles]
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "class"])
            w.writerows(sorted(labels))


def _check_field(field, n: int) -> np.ndarray:
    f = np.asarray(field, dtype=np.float64).ravel()
    if f.size != n:
        raise ValueError(f"field has {f.size} values for {n} points")
    if not np.all(np.isfinite(f)):
        raise ValueError("field values must be finite")
    return f


def detect_extrema(field, graph: NeighborGraph) -> tuple[IndexSubset, IndexSubset]:
    """Strict local maxima and minima over the symmetric neighborhoods."""
    f = _check_field(field, graph.n)
    adj = graph.adjacency
    nb = f[adj.indices]
    starts = adj.indptr[:-1]
    # every point has >= k >= 1 neighbors, so no reduceat segment is empty
    hi = np.maximum.reduceat(nb, starts)
    lo = np.minimum.reduceat(nb, starts)
    return IndexSubset(np.flatnonzero(hi < f)), IndexSubset(np.flatnonzero(lo > f))


def embed_2d(spectrum: Spectrum) -> np.ndarray:
    """Planar coordinates (phi_2, phi_3): the Laplacian-eigenmap projection."""
    if spectrum.m < 3:
        raise ValueError(f"planar embedding needs at least 3 eigenpairs, got {spectrum.m}")
    return np.ascontiguousarray(spectrum.eigenvectors[:, 1:3])


class OneRings:
    """Counter-clockwise neighbor rings of every point in a planar projection.

    The ordering depends only on the graph and the coordinates, so one
    instance serves any number of fields.
    """

    def __init__(self, graph: NeighborGraph, coords):
        coords = np.asarray(coords, dtype=np.float64)
        if coords.shape != (graph.n, 2):
            raise ValueError(f"coords must have shape ({graph.n}, 2), got {coords.shape}")
        if graph.k < MIN_SADDLE_K:
            raise ValueError(f"saddle detection needs k >= {MIN_SADDLE_K}, got k={graph.k}")
        adj = graph.adjacency
        owner = np.repeat(np.arange(graph.n), np.diff(adj.indptr))
        nbr = adj.indices
        dx = coords[nbr, 0] - coords[owner, 0]
        dy = coords[nbr, 1] - coords[owner, 1]
        keep = (dx != 0) | (dy != 0)
        self.dropped = int(np.count_nonzero(~keep))
        owner, nbr, dx, dy = owner[keep], nbr[keep], dx[keep], dy[keep]
        angle = np.arctan2(dy, dx)
        dist = np.hypot(dx, dy)
        order = np.lexsort((nbr, dist, angle, owner))
        self.owner = owner[order]
        self.ring = nbr[order]
        counts = np.bincount(self.owner, minlength=graph.n)
        self.indptr = np.concatenate([[0], np.cumsum(counts)])
        pos = np.arange(self.ring.size)
        nxt = pos + 1
        row_end = self.indptr[self.owner + 1]
        wrap = nxt >= row_end
        nxt[wrap] = self.indptr[self.owner[wrap]]
        self.next = nxt
        self.n = graph.n

    def sign_changes(self, field) -> np.ndarray:
        f = _check_field(field, self.n)
        minus = f[self.owner] >= f[self.ring]
        change = minus != minus[self.next]
        return np.bincount(self.owner, weights=change, minlength=self.n).astype(np.int64)


def detect_saddles(field, graph: NeighborGraph, coords=None, rings: OneRings | None = None) -> IndexSubset:
    """Points with at least four sign changes around their one-ring, minus strict extrema."""
    if rings is None:
        if coords is None:
            raise ValueError("either coords or precomputed rings are required")
        rings = OneRings(graph, coords)
    changes = rings.sign_changes(field)
    mx, mn = detect_extrema(field, graph)
    cand = np.flatnonzero(changes >= 4)
    cand = np.setdiff1d(cand, np.union1d(mx.indices, mn.indices))
    return IndexSubset(cand)


def classify_field(field, graph: NeighborGraph, coords=None, rings: OneRings | None = None) -> FeatureClassification:
    """Extrema plus saddles. With k < 4 no ring can reach four sign changes, so the saddle set is empty."""
    mx, mn = detect_extrema(field, graph)
    if rings is None and graph.k < MIN_SADDLE_K:
        return FeatureClassification(mx, mn, IndexSubset())
    saddles = detect_saddles(field, graph, coords, rings)
    return FeatureClassification(mx, mn, saddles)
