"""The simplification pipeline and the heat-kernel-signature diagnostic."""
from __future__ import annotations

import time
import warnings as _warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dataset_io import DataSet, IndexSubset
from .features import MIN_SADDLE_K, OneRings, classify_field, detect_extrema, embed_2d
from .knn import DEFAULT_K, build_knn
from .laplacian import DisconnectedGraphWarning, build_laplacian, choose_bandwidth
from .metrics import DEFAULT_BINS, MetricReport, metric_report
from .spectrum import Spectrum, solve_spectrum

STOP_KINDS = ("rate", "dkl", "dh")


@dataclass(frozen=True)
class StopRule:
    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in STOP_KINDS:
            raise ValueError(f"stop kind must be one of {STOP_KINDS}, got {self.kind!r}")
        if not self.value > 0:
            raise ValueError("stop threshold must be positive")

    @classmethod
    def parse(cls, text: str) -> "StopRule":
        """Parse ``rate=0.2``, ``dkl=0.05`` or ``dh=1.5``."""
        kind, sep, value = text.partition("=")
        if not sep:
            raise ValueError(f"stop rule must look like kind=value, got {text!r}")
        try:
            return cls(kind.strip(), float(value))
        except ValueError as exc:
            raise ValueError(f"bad stop rule {text!r}: {exc}") from None

    def satisfied(self, report: MetricReport) -> bool:
        if self.kind == "rate":
            return report.rate >= self.value
        if self.kind == "dkl":
            return report.d_kl <= self.value
        return report.d_h <= self.value

    def __str__(self):
        return f"{self.kind}={self.value!r}"


@dataclass(frozen=True)
class SimplificationConfig:
    k: int = DEFAULT_K
    bandwidth: Optional[float] = None  # None selects the median k-th neighbor distance
    max_eigenvectors: int = 30
    stop: Optional[StopRule] = None  # None runs the whole eigenvector budget
    bins: int = DEFAULT_BINS
    eigen_method: str = "auto"
    threads: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.max_eigenvectors < 1:
            raise ValueError("max_eigenvectors must be >= 1")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError("bandwidth must be positive")

    def as_dict(self) -> dict:
        return {"k": self.k, "bandwidth": "auto" if self.bandwidth is None else self.bandwidth,
                "max_eigenvectors": self.max_eigenvectors,
                "stop": None if self.stop is None else str(self.stop),
                "bins": self.bins, "eigen_method": self.eigen_method, "threads": self.threads}


@dataclass(frozen=True)
class Step:
    eigenvector_index: int  # 1-based; phi_1 is never a step
    subset: IndexSubset
    report: MetricReport
    new_points: int


@dataclass
class SimplificationResult:
    steps: list
    eigenvalues: np.ndarray
    bandwidth: float
    warnings: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    stop_satisfied: bool = False
    budget_exhausted: bool = False
    dropped_ring_neighbors: int = 0

    @property
    def final(self) -> IndexSubset:
        return self.steps[-1].subset if self.steps else IndexSubset()

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(s.report, name) for s in self.steps])


def simplify(data: DataSet, config: SimplificationConfig = SimplificationConfig()) -> SimplificationResult:
    """Accumulate feature points of phi_2, phi_3, ... until the stop rule holds.

    Every step records the cumulative subset and its metrics. If the budget
    of ``max_eigenvectors`` runs out first, ``budget_exhausted`` is set.
    """
    if data.n < config.k + 1:
        raise ValueError(f"need at least k+1 = {config.k + 1} points, got {data.n}")
    notes: list[str] = []
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    graph = build_knn(data, config.k, threads=config.threads)
    timings["knn"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    t = config.bandwidth if config.bandwidth is not None else choose_bandwidth(graph, data)
    with _warnings.catch_warnings():
        _warnings.simplefilter("ignore", DisconnectedGraphWarning)
        pair = build_laplacian(data, graph, t)
    notes.extend(pair.warnings)
    n_pairs = min(data.n, max(config.max_eigenvectors + 1, 3))
    spec = solve_spectrum(pair, n_pairs, config.eigen_method)
    timings["eigen"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    rings = None
    dropped = 0
    if spec.m >= 3 and config.k >= MIN_SADDLE_K:
        rings = OneRings(graph, embed_2d(spec))
        dropped = rings.dropped
        if dropped:
            notes.append(f"{dropped} ring neighbors coincide with their centre in 2D and were dropped")
    elif config.k < MIN_SADDLE_K:
        notes.append(f"k={config.k} < {MIN_SADDLE_K}: saddle detection skipped")
    else:
        notes.append("fewer than 3 eigenpairs: saddle detection skipped")

    steps: list[Step] = []
    current = IndexSubset()
    satisfied = False
    last = min(config.max_eigenvectors + 1, spec.m)
    for i in range(2, last + 1):
        phi = spec.vector(i)
        if rings is not None:
            found = classify_field(phi, graph, rings=rings).all()
        else:
            mx, mn = detect_extrema(phi, graph)
            found = mx.union(mn)
        grown = current.union(found)
        report = metric_report(data, grown, config.bins)
        steps.append(Step(i, grown, report, len(grown) - len(current)))
        current = grown
        if config.stop is not None and config.stop.satisfied(report):
            satisfied = True
            break
    timings["simplification"] = time.perf_counter() - t0

    exhausted = config.stop is not None and not satisfied
    if exhausted:
        notes.append(f"budget exhausted: stop rule {config.stop} not met within {config.max_eigenvectors} eigenvectors")
    return SimplificationResult(steps=steps, eigenvalues=spec.eigenvalues[:last].copy(), bandwidth=float(t),
                                warnings=notes, timings=timings,
                                stop_satisfied=satisfied or config.stop is None,
                                budget_exhausted=exhausted, dropped_ring_neighbors=dropped)


def hks_diag(spectrum: Spectrum, t: float) -> np.ndarray:
    """Truncated heat kernel signature sum_i exp(-lambda_i t) phi_i(x)^2."""
    if not t > 0:
        raise ValueError("diffusion time must be positive")
    weights = np.exp(-spectrum.eigenvalues * t)
    return (spectrum.eigenvectors ** 2) @ weights
