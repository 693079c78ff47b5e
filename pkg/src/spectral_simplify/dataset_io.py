"""Point-set containers, file formats and the swiss-roll generator.

Two on-disk formats are supported:

* ``csv``: comma separated decimal floats, UTF-8, with an optional header
  row. The header is detected when any token of the first row does not parse
  as a float.
* ``raw-f64``: little-endian float64, row-major, with a JSON sidecar
  ``<path>.json`` holding ``{"rows": n, "cols": d}``.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


class DataFormatError(ValueError):
    """Raised when a data file cannot be parsed or violates DataSet invariants."""


def fmt(x: float) -> str:
    """Shortest round-trip representation (never more than 17 significant digits)."""
    return repr(float(x))


@dataclass(frozen=True)
class DataSet:
    points: np.ndarray
    row_ids: Optional[tuple] = None
    columns: Optional[tuple] = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DataFormatError(f"points must be a non-empty n x d matrix, got shape {pts.shape}")
        bad = np.argwhere(~np.isfinite(pts))
        if len(bad):
            r, c = bad[0]
            raise DataFormatError(f"non-finite value at ({r},{c})")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.row_ids is not None:
            ids = tuple(str(s) for s in self.row_ids)
            if len(ids) != pts.shape[0]:
                raise DataFormatError("row_ids length does not match point count")
            if len(set(ids)) != len(ids):
                raise DataFormatError("row_ids must be unique")
            object.__setattr__(self, "row_ids", ids)
        if self.columns is not None:
            cols = tuple(str(s) for s in self.columns)
            if len(cols) != pts.shape[1]:
                raise DataFormatError("column names do not match column count")
            object.__setattr__(self, "columns", cols)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def take(self, subset: "IndexSubset") -> np.ndarray:
        subset.check(self.n)
        return self.points[subset.indices]


@dataclass(frozen=True)
class IndexSubset:
    """Sorted, duplicate-free row indices into a DataSet."""

    indices: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0):
            raise ValueError("subset indices must be non-negative and strictly increasing")
        idx = idx.copy()
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_any(cls, indices) -> "IndexSubset":
        """Build from an arbitrary iterable of indices (sorted and deduplicated)."""
        return cls(np.unique(np.asarray(list(indices), dtype=np.int64)))

    def check(self, n: int) -> None:
        if self.indices.size and self.indices[-1] >= n:
            raise IndexError(f"subset index {int(self.indices[-1])} out of range for {n} rows")

    def union(self, other: "IndexSubset") -> "IndexSubset":
        return IndexSubset(np.union1d(self.indices, other.indices))

    def __len__(self) -> int:
        return int(self.indices.size)

    def __iter__(self):
        return iter(self.indices.tolist())

    def __contains__(self, i) -> bool:
        pos = np.searchsorted(self.indices, i)
        return bool(pos < self.indices.size and self.indices[pos] == i)


def _infer_format(path: Path, fmt_name: Optional[str]) -> str:
    if fmt_name:
        if fmt_name not in ("csv", "raw-f64"):
            raise ValueError(f"unknown format {fmt_name!r}")
        return fmt_name
    return "raw-f64" if path.suffix.lower() in (".f64", ".bin", ".raw") else "csv"


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def _is_float(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def load_dataset(path, format: Optional[str] = None) -> DataSet:
    """Read a DataSet; row order follows the file."""
    path = Path(path)
    kind = _infer_format(path, format)
    if kind == "raw-f64":
        meta = json.loads(_sidecar(path).read_text())
        rows, cols = int(meta["rows"]), int(meta["cols"])
        arr = np.fromfile(path, dtype="<f8")
        if arr.size != rows * cols:
            raise DataFormatError(f"{path}: expected {rows}x{cols} values, found {arr.size}")
        return DataSet(arr.reshape(rows, cols))

    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(tok.strip() for tok in r)]
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    columns = None
    if not all(_is_float(tok) for tok in rows[0]):
        columns = [tok.strip() for tok in rows[0]]
        rows = rows[1:]
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    width = len(columns) if columns is not None else len(rows[0])
    # physical row numbers are 1-based and count the header
    offset = 2 if columns is not None else 1
    values = np.empty((len(rows), width), dtype=np.float64)
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DataFormatError(f"inconsistent column count at row {i + offset}: "
                                  f"expected {width}, got {len(r)}")
        try:
            values[i] = [float(tok) for tok in r]
        except ValueError as exc:
            raise DataFormatError(f"malformed value at row {i + offset}: {exc}") from None
    return DataSet(values, columns=columns)


def write_matrix_csv(path, matrix: np.ndarray, header: Optional[Sequence[str]] = None) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for row in np.asarray(matrix, dtype=np.float64):
            w.writerow([fmt(v) for v in row])


def save_dataset(data: DataSet, path, format: Optional[str] = None) -> None:
    save_subset(data, IndexSubset(np.arange(data.n)), path, format)


def save_subset(data: DataSet, subset: IndexSubset, path, format: Optional[str] = None) -> None:
    """Write the selected rows, in index order, using the same format policy as ``load_dataset``."""
    path = Path(path)
    rows = data.take(subset)
    kind = _infer_format(path, format)
    if kind == "raw-f64":
        np.ascontiguousarray(rows, dtype="<f8").tofile(path)
        _sidecar(path).write_text(json.dumps({"rows": int(rows.shape[0]), "cols": int(data.d)}))
    else:
        write_matrix_csv(path, rows, data.columns)


def generate_swiss_roll(n: int, noise_sd: float = 0.0, seed: int = 0) -> DataSet:
    """Sample ``n`` points of the standard swiss roll (t*cos t, h, t*sin t).

    ``t`` is uniform on [1.5*pi, 4.5*pi] and ``h`` uniform on [0, 21].
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if noise_sd < 0:
        raise ValueError("noise_sd must be >= 0")
    rng = np.random.default_rng(seed)
    t = 1.5 * np.pi * (1.0 + 2.0 * rng.random(n))
    h = 21.0 * rng.random(n)
    pts = np.column_stack([t * np.cos(t), h, t * np.sin(t)])
    if noise_sd > 0:
        pts = pts + noise_sd * rng.standard_normal(pts.shape)
    return DataSet(pts)


def normalize_columns(data: DataSet):
    """Map every column affinely onto [0, 1].

    Returns the normalized DataSet and an ``(d, 2)`` array of per-column
    (min, max). Constant columns become all zeros.
    """
    lo = data.points.min(axis=0)
    hi = data.points.max(axis=0)
    bounds = np.column_stack([lo, hi])
    return DataSet(apply_normalization(data.points, bounds)), bounds


def apply_normalization(points: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    lo, hi = bounds[:, 0], bounds[:, 1]
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    out = (np.asarray(points, dtype=np.float64) - lo) / safe
    out[:, span <= 0] = 0.0
    return out
