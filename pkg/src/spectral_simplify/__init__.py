"""Simplification of high-dimensional point sets by feature points of the
Laplace-Beltrami eigenfunctions on a k-nearest-neighbor graph."""

__version__ = "0.1.0"

from .dataset_io import (DataFormatError, DataSet, IndexSubset, generate_swiss_roll, load_dataset,
                         normalize_columns, save_dataset, save_subset)
from .embedding import PcaModel, correspondence_error, pca_fit, pca_project, procrustes_align
from .features import FeatureClassification, OneRings, classify_field, detect_extrema, detect_saddles, embed_2d
from .knn import NeighborGraph, build_knn
from .laplacian import DegenerateGeometryError, LaplacianPair, build_laplacian, choose_bandwidth
from .metrics import (MetricReport, cov_det_metric, hausdorff, kl_metric, metric_report, normalize_series,
                      simplification_rate)
from .simplifier import SimplificationConfig, SimplificationResult, StopRule, hks_diag, simplify
from .spectrum import Spectrum, SpectrumConvergenceError, load_spectrum, save_spectrum, solve_spectrum
