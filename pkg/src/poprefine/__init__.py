"""Popularity-score regression with iterative residual refinement.

A random forest gives the first prediction; each refinement stage flags
samples with large residuals (AdaBoost gate) and adds a residual forest's
output to them.
"""
__version__ = "0.1.0"

from .boost import BoostClassifier, Stump, fit_boost, fit_stump, predict_boost
from .dataset import (DataFormat, Dataset, SplitMode, SplitSpec, load_dataset, split,
                      write_dataset)
from .forest import (Forest, RegressionTree, TreeParams, feature_importance, fit_forest,
                     fit_tree, predict_forest, predict_tree)
from .linear import fit_linear, predict_linear
from .metrics import EvalReport, average_ranks, evaluate, mae, mse, spearman_rho
from .persist import load_model, save_model
from .preprocess import (FEATURE_NAMES, EncodingMaps, RawRecord, TextFeatureMode, digitize,
                         digitize_all, fit_encoding_maps, unique_id_convert)
from .refine import (ForestConfig, RefineConfig, RefinementModel, compute_residuals,
                     refine_predict, threshold_labels, train_refinement)
from .sweep import SweepResult, sweep_k, sweep_ty
from .synth import SynthConfig, generate_synthetic
