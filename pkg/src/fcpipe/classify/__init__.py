"""Classifiers and leave-one-out evaluation."""

from .config import KINDS, ClassifierConfig
from .cv import (
    DEFAULT_FPR_TARGETS,
    CvReport,
    loocv,
    model_fingerprint,
    predict_label,
    predict_score,
    report_from_scores,
    roc_points,
    tpr_at_fpr,
    tpr_table,
    train,
)
from .forest import ForestModel, gini, train_random_forest
from .linear import LinearModel, standardize_apply, standardize_fit, train_linear_svm, train_logreg

__all__ = [
    "KINDS",
    "ClassifierConfig",
    "CvReport",
    "DEFAULT_FPR_TARGETS",
    "ForestModel",
    "LinearModel",
    "gini",
    "loocv",
    "model_fingerprint",
    "predict_label",
    "predict_score",
    "report_from_scores",
    "roc_points",
    "standardize_apply",
    "standardize_fit",
    "tpr_at_fpr",
    "tpr_table",
    "train",
    "train_linear_svm",
    "train_logreg",
    "train_random_forest",
]
