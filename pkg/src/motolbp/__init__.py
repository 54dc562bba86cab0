"""Motorcycle vs non-motorcycle cell classification with uniform LBP features and linear SVMs."""

from .ingest import (DatasetManifest, ManifestEntry, MeshSpec, build_manifest, extract_cell, extract_frames, load_gray,
                     mesh_cells, to_grayscale)
from .lbp import LbpParams, histogram_feature, lbp_code, lbp_feature, lbp_map, neighbor_offsets
from .metrics import ContingencyTable, contingency, rates, roc_auc, roc_curve
from .svm import LinearModel, SvmScenario, decision_function, load_model, objective_value, predict, save_model, train
from .harness import SampleSpec, build_samples, draw_sample, run_sweep, scenario_table, split

__version__ = "0.1.0"
