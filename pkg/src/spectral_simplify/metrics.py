"""Fidelity of a row subset S of H: histogram KL metric, Hausdorff distance,
covariance-determinant difference and simplification rate."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .dataset_io import DataSet, IndexSubset, apply_normalization
from .knn import exact_sqdist

DEFAULT_BINS = 100


@dataclass(frozen=True)
class MetricReport:
    d_kl: float
    d_h: float
    d_cov: float
    log_det_h: float
    log_det_s: float
    rate: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _rows(H: DataSet, S_rows: IndexSubset) -> np.ndarray:
    if len(S_rows) == 0:
        raise ValueError("subset is empty")
    return H.take(S_rows)


def smoothed_histogram(values: np.ndarray, bins: int) -> np.ndarray:
    """Per-column probabilities of ``bins`` equal cells on [0, 1].

    ``values`` is (m,) or (m, d); the result is (bins,) or (d, bins). Each
    cell gets a pseudo-count of 1/bins, which is the same as adding
    ``1/(bins*m)`` to every relative frequency and renormalizing.
    """
    v = np.asarray(values, dtype=np.float64)
    flat = v.ndim == 1
    if flat:
        v = v[:, None]
    m, d = v.shape
    cell = np.minimum((np.clip(v, 0.0, 1.0) * bins).astype(np.int64), bins - 1)
    cell += np.arange(d) * bins
    counts = np.bincount(cell.ravel(), minlength=d * bins).reshape(d, bins).astype(np.float64)
    probs = (counts + 1.0 / bins) / (m + 1.0)
    return probs[0] if flat else probs


def kl_metric(H: DataSet, S_rows: IndexSubset, bins: int = DEFAULT_BINS) -> float:
    """Root-sum-square over columns of KL(P_k || Q_k), natural log.

    Both sets are mapped to [0, 1] with H's per-column range; S values are
    clamped so the same code handles a general second set.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    S = _rows(H, S_rows)
    bounds = np.column_stack([H.points.min(axis=0), H.points.max(axis=0)])
    P = smoothed_histogram(apply_normalization(H.points, bounds), bins)
    Q = smoothed_histogram(apply_normalization(S, bounds), bins)
    per_column = np.sum(P * np.log(P / Q), axis=1)
    return float(np.sqrt(np.sum(per_column ** 2)))


def hausdorff(H: DataSet, S_rows: IndexSubset, block_size: int = 1024) -> float:
    """max over x in H of min over y in S of |x - y| (S is a subset of H)."""
    S = _rows(H, S_rows)
    pts = H.points
    s_norm = np.einsum("ij,ij->i", S, S)
    slack = 1e-9 * (s_norm.max() + np.einsum("ij,ij->i", pts, pts)) + 1e-300
    member = np.zeros(H.n, dtype=bool)
    member[S_rows.indices] = True
    worst = 0.0
    for start in range(0, H.n, block_size):
        stop = min(start + block_size, H.n)
        rows = np.flatnonzero(~member[start:stop]) + start
        if rows.size == 0:
            continue
        q = pts[rows]
        approx = np.einsum("ij,ij->i", q, q)[:, None] + s_norm[None, :] - 2.0 * (q @ S.T)
        best = approx.min(axis=1)
        # points that cannot beat the running maximum need no exact pass
        live = np.flatnonzero(best + 2 * slack[rows] > worst * worst)
        for r in live:
            cand = np.flatnonzero(approx[r] <= best[r] + 2 * slack[rows[r]])
            d2 = exact_sqdist(q[r], S[cand]).min()
            if d2 > worst * worst:
                worst = math.sqrt(d2)
    return worst


def _logdet_cov(X: np.ndarray) -> tuple[float, float]:
    centered = X - X.mean(axis=0)
    cov = centered.T @ centered / X.shape[0]
    sign, logabs = np.linalg.slogdet(cov)
    return float(sign), float(logabs)


def _exp(x: float) -> float:
    return math.exp(x) if x < 709.0 else math.inf


def cov_det_metric(H: DataSet, S_rows: IndexSubset) -> tuple[float, float, float]:
    """|det Cov(H) - det Cov(S)| with population covariances.

    Returns ``(d_cov, log|det Cov(H)|, log|det Cov(S)|)``. Singular
    covariances report ``-inf`` as their log-magnitude.
    """
    if len(S_rows) < 2:
        raise ValueError("covariance metric needs at least two subset rows")
    S = H.take(S_rows)
    sh, lh = _logdet_cov(H.points)
    ss, ls = _logdet_cov(S)
    if sh == 0 and ss == 0:
        return 0.0, lh, ls
    if sh == 0:
        return _exp(ls), lh, ls
    if ss == 0:
        return _exp(lh), lh, ls
    top = max(lh, ls)
    if sh == ss:
        # |e^a - e^b| = e^max * (1 - e^(min - max))
        diff = -math.expm1(min(lh, ls) - top)
    else:
        diff = 1.0 + math.exp(min(lh, ls) - top)
    if diff == 0.0:
        return 0.0, lh, ls
    return _exp(top + math.log(diff)), lh, ls


def simplification_rate(H: DataSet, S_rows: IndexSubset) -> float:
    return len(S_rows) / H.n


def normalize_series(values) -> np.ndarray:
    """Divide by the largest magnitude; an all-zero series stays zero."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("series is empty")
    top = np.max(np.abs(v))
    return v / top if top > 0 else np.zeros_like(v)


def metric_report(H: DataSet, S_rows: IndexSubset, bins: int = DEFAULT_BINS) -> MetricReport:
    """All metrics at once; undefined entries (tiny subsets) are NaN."""
    nan = float("nan")
    if len(S_rows) == 0:
        return MetricReport(nan, nan, nan, nan, nan, 0.0)
    d_kl = kl_metric(H, S_rows, bins)
    d_h = hausdorff(H, S_rows)
    if len(S_rows) >= 2:
        d_cov, lh, ls = cov_det_metric(H, S_rows)
    else:
        d_cov, lh, ls = nan, nan, nan
    return MetricReport(d_kl, d_h, d_cov, lh, ls, simplification_rate(H, S_rows))
