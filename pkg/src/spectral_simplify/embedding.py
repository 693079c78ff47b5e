"""PCA on a (simplified) set, out-of-sample projection and correspondence error."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import eigsh


@dataclass(frozen=True, eq=False)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # d x p, orthonormal columns
    explained: np.ndarray  # p variances, descending

    @property
    def d(self) -> int:
        return self.components.shape[0]

    @property
    def p(self) -> int:
        return self.components.shape[1]


def _top_eigh(M: np.ndarray, p: int):
    """Largest ``p`` eigenpairs of a dense symmetric matrix, descending."""
    size = M.shape[0]
    if p < size // 4:
        v0 = np.random.default_rng(0).standard_normal(size)
        vals, vecs = eigsh(M, k=p, which="LA", v0=v0, ncv=min(size, max(2 * p + 1, 20)), tol=0)
    else:
        vals, vecs = scipy.linalg.eigh(M, subset_by_index=[size - p, size - 1])
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def pca_fit(points, p: int) -> PcaModel:
    """Top-``p`` principal axes of the mean-centered points.

    Uses the d x d covariance when n > d and the n x n Gram matrix otherwise.
    Each component is signed so that its largest-magnitude loading is positive.
    """
    X = np.asarray(getattr(points, "points", points), dtype=np.float64)
    n, d = X.shape
    if not 1 <= p <= min(n - 1, d):
        raise ValueError(f"p must lie in [1, min(n-1, d)] = [1, {min(n - 1, d)}], got {p}")
    mean = X.mean(axis=0)
    Xc = X - mean
    if n > d:
        cov = Xc.T @ Xc / n
        vals, vecs = _top_eigh(cov, p)
    else:
        gram = Xc @ Xc.T / n
        vals, u = _top_eigh(gram, p)
        vals = np.clip(vals, 0.0, None)
        vecs = Xc.T @ u
        norms = np.linalg.norm(vecs, axis=0)
        # null directions of a rank-deficient Gram carry no variance; complete them orthonormally
        null = norms <= 1e-12 * max(1.0, norms.max())
        vecs[:, ~null] /= norms[~null]
        if null.any():
            q, _ = np.linalg.qr(np.column_stack([vecs[:, ~null], np.eye(d)]))
            vecs[:, null] = q[:, (~null).sum():(~null).sum() + null.sum()]
            vals[null] = 0.0
    vals = np.clip(vals, 0.0, None)
    pivot = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[pivot, np.arange(p)])
    signs[signs == 0] = 1.0
    return PcaModel(mean, vecs * signs, vals)


def pca_project(model: PcaModel, points) -> np.ndarray:
    """Coordinates ``(points - mean) @ components``; in- and out-of-sample alike."""
    X = np.asarray(getattr(points, "points", points), dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.d:
        raise ValueError(f"expected {model.d} columns, got shape {X.shape}")
    # X @ C - mean @ C avoids materializing the centered copy of X
    return X @ model.components - model.mean @ model.components


def procrustes_align(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Map ``b`` onto ``a`` by translation plus the best orthogonal transform (reflections allowed)."""
    a_mean, b_mean = a.mean(axis=0), b.mean(axis=0)
    R, _ = scipy.linalg.orthogonal_procrustes(b - b_mean, a - a_mean)
    return (b - b_mean) @ R + a_mean


def correspondence_error(a, b, bins: int = 20):
    """Per-row distance between ``a`` and Procrustes-aligned ``b``, plus a histogram.

    Returns ``(distances, counts, edges)`` where ``counts``/``edges`` follow
    :func:`numpy.histogram`.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    dist = np.linalg.norm(a - procrustes_align(a, b), axis=1)
    counts, edges = np.histogram(dist, bins=bins)
    return dist, counts, edges


def coordinate_spread(coords) -> float:
    """Root-mean-square distance of the coordinates from their centroid."""
    c = np.asarray(coords, dtype=np.float64)
    return float(np.sqrt(np.mean(np.sum((c - c.mean(axis=0)) ** 2, axis=1))))
