"""Evaluation metrics for classification and regression runs.

Classification reports accuracy plus precision/recall/F1 — positive-class
for binary tasks, macro-averaged across classes otherwise. Regression
reports MSE, MAE, RMSE and the cosine distance between the predicted and
actual target vectors.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ClassificationMetrics",
    "RegressionMetrics",
    "classification_metrics",
    "regression_metrics",
]


@dataclass(frozen=True)
class ClassificationMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    averaging: str  # "binary" or "macro"

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


@dataclass(frozen=True)
class RegressionMetrics:
    mse: float
    mae: float
    rmse: float
    cos_distance: float

    def as_dict(self) -> dict:
        return {
            "mse": self.mse,
            "mae": self.mae,
            "rmse": self.rmse,
            "cos_distance": self.cos_distance,
        }


def _prf_for_class(y_true, y_pred, cls) -> tuple[float, float, float]:
    tp = np.sum((y_pred == cls) & (y_true == cls))
    fp = np.sum((y_pred == cls) & (y_true != cls))
    fn = np.sum((y_pred != cls) & (y_true == cls))
    if tp + fp == 0:
        warnings.warn(f"no predicted positives for class {cls}; precision set to 0")
        precision = 0.0
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        warnings.warn(f"no actual positives for class {cls}; recall set to 0")
        recall = 0.0
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0:
        f1 = 0.0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1


def classification_metrics(y_true, y_pred, n_classes: int | None = None) -> ClassificationMetrics:
    """Accuracy, precision, recall and F1 for integer-coded labels.

    Binary tasks report the positive class (label 1); tasks with three or
    more classes report unweighted class means (macro averaging). A class
    with no predicted or no actual positives contributes 0 to the affected
    metric, with a warning.
    """
    y_true = np.asarray(y_true, dtype=np.int64).ravel()
    y_pred = np.asarray(y_pred, dtype=np.int64).ravel()
    if y_true.size == 0:
        raise ValueError("empty label vectors")
    if y_true.shape != y_pred.shape:
        raise ValueError("label vectors must have equal length")
    if n_classes is None:
        n_classes = int(max(y_true.max(), y_pred.max())) + 1
    if y_true.min() < 0 or y_pred.min() < 0 or max(y_true.max(), y_pred.max()) >= n_classes:
        raise ValueError(f"labels outside 0..{n_classes - 1}")
    accuracy = float(np.mean(y_true == y_pred))
    if n_classes == 2:
        precision, recall, f1 = _prf_for_class(y_true, y_pred, 1)
        averaging = "binary"
    else:
        per_class = [_prf_for_class(y_true, y_pred, c) for c in range(n_classes)]
        precision = float(np.mean([p for p, _, _ in per_class]))
        recall = float(np.mean([r for _, r, _ in per_class]))
        f1 = float(np.mean([f for _, _, f in per_class]))
        averaging = "macro"
    return ClassificationMetrics(
        accuracy=accuracy,
        precision=float(precision),
        recall=float(recall),
        f1=float(f1),
        averaging=averaging,
    )


def regression_metrics(y_true, y_pred) -> RegressionMetrics:
    """MSE, MAE, RMSE (= sqrt of MSE exactly), and cosine distance.

    The cosine distance of a zero-norm vector is undefined and reported as
    NaN rather than 0, with a warning.
    """
    y_true = np.asarray(y_true, dtype=float).ravel()
    y_pred = np.asarray(y_pred, dtype=float).ravel()
    if y_true.size == 0:
        raise ValueError("empty target vectors")
    if y_true.shape != y_pred.shape:
        raise ValueError("target vectors must have equal length")
    diff = y_pred - y_true
    mse = float(np.mean(diff**2))
    mae = float(np.mean(np.abs(diff)))
    rmse = float(np.sqrt(mse))
    nt, npred = np.linalg.norm(y_true), np.linalg.norm(y_pred)
    if nt == 0.0 or npred == 0.0:
        warnings.warn("zero-norm vector in cosine distance; reporting NaN")
        cos_distance = float("nan")
    else:
        cos_distance = float(1.0 - np.dot(y_pred, y_true) / (npred * nt))
    return RegressionMetrics(mse=mse, mae=mae, rmse=rmse, cos_distance=cos_distance)
