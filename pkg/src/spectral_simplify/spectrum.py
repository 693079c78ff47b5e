"""Smallest eigenpairs of the pencil W phi = lambda A phi.

Both solvers work on the symmetric similarity ``C = A^-1/2 W A^-1/2`` and map
back with ``phi = A^-1/2 u``, so the returned vectors are A-orthonormal.
Eigenvalues are indexed from 1 in every output (lambda_1 = 0 for a connected
graph).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .dataset_io import load_dataset, write_matrix_csv
from .laplacian import LaplacianPair

DENSE_LIMIT = 2000
RESIDUAL_TOL = 1e-8
INDEXING_NOTE = "1-based: column phi_i pairs with eigenvalues[i-1]; lambda_1 = 0 for a connected graph"


class SpectrumConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    normalization: str = "A-orthonormal"

    @property
    def m(self) -> int:
        return self.eigenvalues.shape[0]

    def vector(self, i: int) -> np.ndarray:
        """Eigenvector phi_i (1-based)."""
        return self.eigenvectors[:, i - 1]


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    mag = np.abs(vecs)
    # first entry within rounding of the largest magnitude, so mirror-symmetric vectors sign consistently
    pivot = np.argmax(mag >= mag.max(axis=0) * (1.0 - 1e-9), axis=0)
    signs = np.sign(vecs[pivot, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def _similarity(pair: LaplacianPair):
    s = 1.0 / np.sqrt(pair.A)
    C = sp.diags(s) @ pair.W @ sp.diags(s)
    # symmetric by construction; average away rounding in the scaling
    C = (C + C.T) * 0.5
    return C.tocsr(), s


def _finish(pair: LaplacianPair, vals, u, s) -> Spectrum:
    order = np.argsort(vals, kind="stable")
    phi = _fix_signs(u[:, order] * s[:, None])
    # Rayleigh quotients are at least as accurate as the solver's Ritz values
    Wphi = pair.W @ phi
    lam = np.einsum("ij,ij->j", phi, Wphi) / np.einsum("ij,ij->j", phi, pair.A[:, None] * phi)
    lam.setflags(write=False)
    phi.setflags(write=False)
    return Spectrum(lam, phi)


def dense_oracle(pair: LaplacianPair) -> Spectrum:
    """Full spectrum from a dense symmetric eigendecomposition (n <= 2000)."""
    n = pair.n
    if n > DENSE_LIMIT:
        raise ValueError(f"dense oracle limited to n <= {DENSE_LIMIT}, got {n}")
    if n < 2:
        raise ValueError("dense oracle needs at least two points")
    C, s = _similarity(pair)
    vals, u = scipy.linalg.eigh(C.toarray())
    return _finish(pair, vals, u, s)


def residuals(pair: LaplacianPair, spec: Spectrum) -> np.ndarray:
    """Relative residuals |W phi - lambda A phi| / |A phi| per eigenpair."""
    phi = spec.eigenvectors
    Aphi = pair.A[:, None] * phi
    r = pair.W @ phi - Aphi * spec.eigenvalues
    return np.linalg.norm(r, axis=0) / np.linalg.norm(Aphi, axis=0)


def solve_spectrum(pair: LaplacianPair, m: int, method: str = "auto",
                   maxiter: int | None = None) -> Spectrum:
    """The ``m`` algebraically smallest eigenpairs of (W, A).

    ``method`` is ``"dense"``, ``"lanczos"`` (implicitly restarted Lanczos with
    a fixed start vector) or ``"auto"``, which uses dense below 2000 points.
    Each eigenvector is signed so its largest-magnitude entry is positive.
    """
    n = pair.n
    if not 1 <= m <= n:
        raise ValueError(f"m must lie in [1, n] = [1, {n}], got {m}")
    if method == "auto":
        method = "dense" if n < DENSE_LIMIT else "lanczos"
    if method == "lanczos" and m >= n - 1:
        method = "dense"

    if method == "dense":
        full = dense_oracle(pair)
        spec = Spectrum(full.eigenvalues[:m].copy(), full.eigenvectors[:, :m].copy())
    elif method == "lanczos":
        C, s = _similarity(pair)
        v0 = np.random.default_rng(0).standard_normal(n)
        ncv = min(n, max(2 * m + 1, m + 20))
        try:
            vals, u = eigsh(C, k=m, which="SA", v0=v0, ncv=ncv, tol=0,
                            maxiter=maxiter or max(1000, 10 * n))
        except ArpackNoConvergence as exc:
            got = len(exc.eigenvalues)
            raise SpectrumConvergenceError(
                f"Lanczos converged only {got} of {m} eigenpairs; eigenpair {got + 1} stalled") from None
        spec = _finish(pair, vals, u, s)
    else:
        raise ValueError(f"unknown method {method!r}")

    res = residuals(pair, spec)
    bad = np.flatnonzero(res > RESIDUAL_TOL)
    if bad.size:
        i = int(bad[0])
        raise SpectrumConvergenceError(
            f"eigenpair {i + 1} stalled: relative residual {res[i]:.3e} > {RESIDUAL_TOL}")
    return spec


def save_spectrum(spec: Spectrum, path) -> None:
    """Eigenvectors as CSV (one row per point) plus a ``<path>.json`` eigenvalue sidecar."""
    path = Path(path)
    header = [f"phi_{i}" for i in range(1, spec.m + 1)]
    write_matrix_csv(path, spec.eigenvectors, header)
    meta = {"indexing": INDEXING_NOTE, "normalization": spec.normalization,
            "eigenvalues": [float(v) for v in spec.eigenvalues]}
    path.with_name(path.name + ".json").write_text(json.dumps(meta, indent=2) + "\n")


def load_spectrum(path) -> Spectrum:
    path = Path(path)
    meta = json.loads(path.with_name(path.name + ".json").read_text())
    vecs = load_dataset(path, "csv").points
    vals = np.asarray(meta["eigenvalues"], dtype=np.float64)
    if vals.size != vecs.shape[1]:
        raise ValueError(f"{path}: {vecs.shape[1]} eigenvector columns but {vals.size} eigenvalues")
    return Spectrum(vals, vecs)
