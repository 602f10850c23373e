"""Resampling recommendation for imbalanced binary classification.

Resamplers (random over-/under-sampling, SMOTE), from-scratch classifiers,
a PR-AUC cross-validation harness, meta-feature extraction, two
meta-learning recommendation systems, and the recommendation-accuracy
assessment that compares them against static strategies.
"""

from .data import (Dataset, FoldAssignment, MixtureConfig, generate_mixture,
                   imbalance_ratio, ingest_csv, stratified_folds, write_csv)
from .evaluation import QualityGrid, cv_quality, pr_auc, quality_grid
from .learners import LearnerSpec, fit, predict_label, predict_score
from .metafeatures import MetaFeatures, compute_meta_features, slog
from .qualityvars import (binarize_targets, compute_quality_variables,
                          paired_ttest_pvalue)
from .recommender import (PRESETS, Recommendation, RecommenderModel,
                          build_meta_dataset, recommend, train_approach1,
                          train_approach2)
from .resampling import (ResamplingSpec, random_oversample, random_undersample,
                         resample, smote)
from .assessment import (StaticStrategy, apply_static, assess_bank, ecdf,
                         recommendation_accuracy)

__version__ = "0.1.0"
