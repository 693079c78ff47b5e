"""Command-line front end.

Exit codes: 0 success, 1 runtime or pipeline failure, 2 usage or validation
error. Numeric CSV output uses shortest round-trip float formatting, so
identical runs produce byte-identical files.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .dataset_io import (DataSet, IndexSubset, fmt, generate_swiss_roll, load_dataset,
                         save_dataset, save_subset, write_matrix_csv)
from .embedding import correspondence_error, pca_fit, pca_project
from .knn import DEFAULT_K, build_knn
from .laplacian import build_laplacian, choose_bandwidth
from .metrics import DEFAULT_BINS, metric_report
from .simplifier import SimplificationConfig, StopRule, hks_diag, simplify
from .spectrum import INDEXING_NOTE, load_spectrum, save_spectrum, solve_spectrum

log = logging.getLogger("spectral_simplify")

THREADS_ENV = "SPECTRAL_SIMPLIFY_THREADS"

# simplify settings that may come from --config; flags win over the file
SIMPLIFY_DEFAULTS = {
    "k": DEFAULT_K,
    "bandwidth": "auto",
    "eigs": 30,
    "stop": None,
    "bins": DEFAULT_BINS,
    "eigen_method": "auto",
    "threads": None,
}


class UsageError(Exception):
    pass


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def _parse_bandwidth(value):
    if value is None or value == "auto":
        return None
    try:
        t = float(value)
    except (TypeError, ValueError):
        raise UsageError(f"--bandwidth must be 'auto' or a positive number, got {value!r}") from None
    if not t > 0:
        raise UsageError("--bandwidth must be positive")
    return t


def _positive(name, value):
    if value is None or int(value) < 1:
        raise UsageError(f"--{name} must be >= 1, got {value}")
    return int(value)


def _load(path: str, fmt_name=None) -> DataSet:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"input file not found: {p}")
    return load_dataset(p, fmt_name)


def _write_manifest(out_dir: Path, manifest: dict) -> Path:
    path = out_dir / "manifest.json"
    manifest["outputs"] = sorted(set(manifest.get("outputs", [])) | {str(path)})
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return path


def cmd_gen(args) -> int:
    if args.n < 1:
        raise UsageError(f"--n must be >= 1, got {args.n}")
    if args.noise < 0:
        raise UsageError("--noise must be >= 0")
    data = generate_swiss_roll(args.n, args.noise, args.seed)
    save_dataset(data, args.out, args.format)
    log.info("wrote %d points to %s", data.n, args.out)
    return 0


def _simplify_settings(args) -> dict:
    settings = dict(SIMPLIFY_DEFAULTS)
    if args.config:
        cfg_path = Path(args.config)
        try:
            file_cfg = json.loads(cfg_path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {cfg_path}: {exc}") from None
        unknown = set(file_cfg) - set(SIMPLIFY_DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        settings.update(file_cfg)
    for key in SIMPLIFY_DEFAULTS:
        val = getattr(args, key)
        if val is not None:
            settings[key] = val
    return settings


def cmd_simplify(args) -> int:
    s = _simplify_settings(args)
    k = _positive("k", s["k"])
    eigs = _positive("eigs", s["eigs"])
    bins = _positive("bins", s["bins"])
    threads = _positive("threads", s["threads"]) if s["threads"] is not None else _default_threads()
    try:
        stop = StopRule.parse(s["stop"]) if s["stop"] else None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if s["eigen_method"] not in ("auto", "dense", "lanczos"):
        raise UsageError(f"unknown eigen method {s['eigen_method']!r}")
    config = SimplificationConfig(k=k, bandwidth=_parse_bandwidth(s["bandwidth"]), max_eigenvectors=eigs,
                                  stop=stop, bins=bins, eigen_method=s["eigen_method"], threads=threads)

    in_path = Path(args.input)
    t0 = time.perf_counter()
    data = _load(args.input, args.format)
    load_time = time.perf_counter() - t0
    if data.n < k + 1:
        raise UsageError(f"--k {k} needs at least {k + 1} points; input has {data.n}")
    result = simplify(data, config)

    out = Path(args.out_dir)
    (out / "subsets").mkdir(parents=True, exist_ok=True)
    outputs = []
    steps_path = out / "steps.csv"
    with open(steps_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "eigenvector_index", "size", "rate", "d_kl", "d_h", "d_cov"])
        for n_step, st in enumerate(result.steps, start=1):
            r = st.report
            w.writerow([n_step, st.eigenvector_index, len(st.subset), fmt(r.rate),
                        fmt(r.d_kl), fmt(r.d_h), fmt(r.d_cov)])
    outputs.append(str(steps_path))
    for n_step, st in enumerate(result.steps, start=1):
        p = out / "subsets" / f"step_{n_step:03d}.csv"
        save_subset(data, st.subset, p)
        outputs.append(str(p))
    final_path = out / "subset.csv"
    save_subset(data, result.final, final_path)
    idx_path = out / "subset_indices.csv"
    idx_path.write_text("index\n" + "".join(f"{i}\n" for i in result.final))
    outputs += [str(final_path), str(idx_path)]

    manifest = {
        "command": "simplify",
        "version": __version__,
        "config": config.as_dict(),
        "input": {"path": str(in_path), "sha256": _sha256(in_path), "rows": data.n, "cols": data.d},
        "bandwidth_used": result.bandwidth,
        "eigenvalues_used": [float(v) for v in result.eigenvalues],
        "eigenvalue_indexing": INDEXING_NOTE,
        "timings_seconds": {"load": load_time, **result.timings},
        "warnings": result.warnings,
        "stop_satisfied": result.stop_satisfied,
        "budget_exhausted": result.budget_exhausted,
        "final_size": len(result.final),
        "outputs": outputs,
    }
    _write_manifest(out, manifest)
    log.info("%d steps, final subset %d of %d points", len(result.steps), len(result.final), data.n)
    return 0


def _match_rows(full: DataSet, sub: DataSet) -> IndexSubset:
    lookup: dict[bytes, list[int]] = {}
    for i, row in enumerate(full.points):
        lookup.setdefault(row.tobytes(), []).append(i)
    picked = []
    for j, row in enumerate(sub.points):
        bucket = lookup.get(row.tobytes())
        if not bucket:
            raise ValueError(f"subset row {j} is not a row of the full data set")
        picked.append(bucket.pop(0))
    return IndexSubset.from_any(picked)


def cmd_metrics(args) -> int:
    bins = _positive("bins", args.bins)
    full = _load(args.full, args.format)
    sub = _load(args.subset, args.format)
    if sub.d != full.d:
        raise ValueError(f"subset has {sub.d} columns, full set has {full.d}")
    rows = _match_rows(full, sub)
    report = metric_report(full, rows, bins)
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def cmd_eig(args) -> int:
    k = _positive("k", args.k)
    m = _positive("m", args.m)
    t_arg = _parse_bandwidth(args.bandwidth)
    data = _load(args.input, args.format)
    if data.n < k + 1:
        raise UsageError(f"--k {k} needs at least {k + 1} points; input has {data.n}")
    if m > data.n:
        raise UsageError(f"--m {m} exceeds the point count {data.n}")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    timings = {}
    t0 = time.perf_counter()
    graph = build_knn(data, k, threads=args.threads or _default_threads())
    timings["knn"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    t = t_arg if t_arg is not None else choose_bandwidth(graph, data)
    pair = build_laplacian(data, graph, t)
    spec = solve_spectrum(pair, m, args.eigen_method)
    timings["eigen"] = time.perf_counter() - t0

    outputs = []
    vec_path = out / "spectrum.csv"
    save_spectrum(spec, vec_path)
    outputs += [str(vec_path), str(vec_path) + ".json"]
    if args.dump_graph:
        graph.write_edges(out / "graph_edges.csv")
        outputs.append(str(out / "graph_edges.csv"))
    if args.dump_laplacian:
        pair.write_coo(out / "laplacian_coo.csv")
        outputs.append(str(out / "laplacian_coo.csv"))
    eig_json = out / "eigenvalues.json"
    eig_json.write_text(json.dumps({"indexing": INDEXING_NOTE,
                                    "eigenvalues": [float(v) for v in spec.eigenvalues]}, indent=2) + "\n")
    outputs.append(str(eig_json))
    _write_manifest(out, {"command": "eig", "version": __version__,
                          "config": {"k": k, "m": m, "bandwidth": args.bandwidth,
                                     "eigen_method": args.eigen_method},
                          "input": {"path": args.input, "sha256": _sha256(Path(args.input))},
                          "bandwidth_used": t, "timings_seconds": timings,
                          "warnings": list(pair.warnings), "outputs": outputs})
    return 0


def cmd_hks(args) -> int:
    if not args.t > 0:
        raise UsageError("--t must be positive")
    spec = load_spectrum(args.spectrum)
    values = hks_diag(spec, args.t)
    write_matrix_csv(args.out, values[:, None], ["hks"])
    return 0


def cmd_embed(args) -> int:
    p = _positive("p", args.p)
    fit = _load(args.fit_on, args.format)
    target = _load(args.project, args.format)
    if fit.d != target.d:
        raise ValueError(f"--fit-on has {fit.d} columns but --project has {target.d}")
    if p > min(fit.n - 1, fit.d):
        raise UsageError(f"--p {p} exceeds min(n-1, d) = {min(fit.n - 1, fit.d)} of the fit set")
    model = pca_fit(fit, p)
    coords = pca_project(model, target)
    write_matrix_csv(args.out, coords, [f"pc_{i}" for i in range(1, p + 1)])
    if args.hist_out:
        reference = pca_project(pca_fit(target, p), target)
        dist, counts, edges = correspondence_error(reference, coords, bins=args.hist_bins)
        with open(args.hist_out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bin_low", "bin_high", "count"])
            for lo, hi, c in zip(edges[:-1], edges[1:], counts):
                w.writerow([fmt(lo), fmt(hi), int(c)])
        log.info("median correspondence error %s", fmt(np.median(dist)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spectral-simplify",
                                     description="Point-set simplification by Laplace-Beltrami feature points")
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    fmt_help = "file format (default: inferred from extension; .f64/.bin/.raw are raw-f64)"

    g = sub.add_parser("gen", parents=[common], help="generate a swiss-roll data set")
    g.add_argument("--n", type=int, default=2000)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--format", choices=["csv", "raw-f64"], help=fmt_help)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("simplify", parents=[common], help="run the full simplification pipeline")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--k", type=int, help=f"neighbor count (default {DEFAULT_K})")
    s.add_argument("--bandwidth", help="'auto' or an explicit t in squared-distance units")
    s.add_argument("--eigs", type=int, help="non-trivial eigenvector budget (default 30)")
    s.add_argument("--stop", help="rate=<r>, dkl=<tau> or dh=<tau>")
    s.add_argument("--bins", type=int, help=f"histogram bins for d_kl (default {DEFAULT_BINS})")
    s.add_argument("--eigen-method", dest="eigen_method", choices=["auto", "dense", "lanczos"])
    s.add_argument("--threads", type=int, help=f"worker cap (default ${THREADS_ENV} or 1)")
    s.add_argument("--config", help="JSON file with defaults for the flags above")
    s.add_argument("--format", choices=["csv", "raw-f64"], help=fmt_help)
    s.set_defaults(func=cmd_simplify)

    m = sub.add_parser("metrics", parents=[common], help="fidelity of a subset file to a full file")
    m.add_argument("--full", required=True)
    m.add_argument("--subset", required=True)
    m.add_argument("--bins", type=int, default=DEFAULT_BINS)
    m.add_argument("--out", help="also write the JSON report here")
    m.add_argument("--format", choices=["csv", "raw-f64"], help=fmt_help)
    m.set_defaults(func=cmd_metrics)

    e = sub.add_parser("eig", parents=[common], help="compute and export the low spectrum")
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--out-dir", required=True)
    e.add_argument("--k", type=int, default=DEFAULT_K)
    e.add_argument("--m", type=int, default=10)
    e.add_argument("--bandwidth", default="auto")
    e.add_argument("--eigen-method", dest="eigen_method", choices=["auto", "dense", "lanczos"], default="auto")
    e.add_argument("--threads", type=int)
    e.add_argument("--dump-graph", action="store_true", help="write the KNN edge list")
    e.add_argument("--dump-laplacian", action="store_true", help="write W in coordinate form")
    e.add_argument("--format", choices=["csv", "raw-f64"], help=fmt_help)
    e.set_defaults(func=cmd_eig)

    h = sub.add_parser("hks", parents=[common], help="heat kernel signature from a saved spectrum")
    h.add_argument("--spectrum", required=True, help="spectrum.csv written by 'eig'")
    h.add_argument("--t", type=float, required=True)
    h.add_argument("--out", required=True)
    h.set_defaults(func=cmd_hks)

    b = sub.add_parser("embed", parents=[common], help="PCA on one set, projection of another")
    b.add_argument("--fit-on", required=True)
    b.add_argument("--project", required=True)
    b.add_argument("--p", type=int, default=2)
    b.add_argument("--out", required=True)
    b.add_argument("--hist-out", help="correspondence-error histogram against PCA fitted on --project")
    b.add_argument("--hist-bins", type=int, default=20)
    b.add_argument("--format", choices=["csv", "raw-f64"], help=fmt_help)
    b.set_defaults(func=cmd_embed)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - every pipeline failure maps to exit 1
        print(f"{parser.prog} {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
