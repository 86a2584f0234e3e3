"""Confusion-matrix metrics and ROC/AUC.

Zero-denominator metrics are reported as ``None`` — an explicit undefined
state, never a silent 0. AUC is the trapezoidal integral of the ROC curve,
which equals the Mann-Whitney pair-concordance statistic with ties counted
as one half.
"""

from dataclasses import dataclass

import numpy as np


class SingleClassError(ValueError):
    """ROC/AUC requested for labels containing only one class."""


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def _as_binary(values, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0 and 1")
    return arr.astype(np.int64)


def confusion(predictions, labels) -> ConfusionMatrix:
    """Count the standard 2x2 table of binary predictions against labels."""
    preds = _as_binary(predictions, "predictions")
    y = _as_binary(labels, "labels")
    if preds.size != y.size:
        raise ValueError(
            f"length mismatch: {preds.size} predictions vs {y.size} labels"
        )
    tp = int(np.sum((preds == 1) & (y == 1)))
    fp = int(np.sum((preds == 1) & (y == 0)))
    tn = int(np.sum((preds == 0) & (y == 0)))
    fn = int(np.sum((preds == 0) & (y == 1)))
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def _ratio(numerator: int, denominator: int):
    if denominator == 0:
        return None
    return numerator / denominator


def precision(cm: ConfusionMatrix):
    """TP / (TP + FP); None when nothing was predicted positive."""
    return _ratio(cm.tp, cm.tp + cm.fp)


def sensitivity(cm: ConfusionMatrix):
    """TP / (TP + FN); None when no positives exist."""
    return _ratio(cm.tp, cm.tp + cm.fn)


def specificity(cm: ConfusionMatrix):
    """TN / (TN + FP); None when no negatives exist."""
    return _ratio(cm.tn, cm.tn + cm.fp)


def f1(cm: ConfusionMatrix):
    """2TP / (2TP + FN + FP); None when the denominator vanishes."""
    return _ratio(2 * cm.tp, 2 * cm.tp + cm.fn + cm.fp)


@dataclass(frozen=True)
class MetricSet:
    """The five report metrics; each entry is a float in [0, 1] or None."""

    precision: float | None
    sensitivity: float | None
    specificity: float | None
    f1: float | None
    auc: float | None

    def __post_init__(self):
        for name in ("precision", "sensitivity", "specificity", "f1", "auc"):
            v = getattr(self, name)
            if v is None:
                continue
            if not np.isfinite(v) or not -1e-12 <= v <= 1.0 + 1e-12:
                raise ValueError(f"{name} must lie in [0, 1] or be None, got {v!r}")

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "f1": self.f1,
            "auc": self.auc,
        }


METRIC_NAMES = ("precision", "sensitivity", "specificity", "f1", "auc")


def metric_set(cm: ConfusionMatrix, auc_value=None) -> MetricSet:
    """Bundle the four confusion-matrix metrics with an optional AUC."""
    return MetricSet(
        precision=precision(cm),
        sensitivity=sensitivity(cm),
        specificity=specificity(cm),
        f1=f1(cm),
        auc=auc_value,
    )


@dataclass(frozen=True, eq=False)
class RocCurve:
    """ROC points from threshold +inf down through each distinct score.

    ``thresholds[0]`` is +inf (nothing predicted positive), after which each
    distinct observed score appears once in descending order; a row is
    predicted positive when its score >= threshold. The curve therefore
    begins at (0, 0) and ends at (1, 1), and both coordinate sequences are
    non-decreasing.
    """

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray

    def __post_init__(self):
        n = self.thresholds.size
        if n < 2 or self.fpr.size != n or self.tpr.size != n:
            raise ValueError("curve arrays must share a length of at least 2")
        if not (self.fpr[0] == 0.0 and self.tpr[0] == 0.0):
            raise ValueError("curve must begin at (0, 0)")
        if not (self.fpr[-1] == 1.0 and self.tpr[-1] == 1.0):
            raise ValueError("curve must end at (1, 1)")
        if np.any(np.diff(self.fpr) < 0) or np.any(np.diff(self.tpr) < 0):
            raise ValueError("curve coordinates must be non-decreasing")
        for arr in (self.thresholds, self.fpr, self.tpr):
            arr.setflags(write=False)

    @property
    def points(self) -> list:
        """(false_positive_rate, true_positive_rate) pairs in curve order."""
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))

    def trapezoid_area(self) -> float:
        widths = np.diff(self.fpr)
        heights = 0.5 * (self.tpr[1:] + self.tpr[:-1])
        return float(np.sum(widths * heights))


def _check_roc_inputs(scores, labels):
    s = np.asarray(scores, dtype=np.float64)
    y = _as_binary(labels, "labels")
    if s.ndim != 1 or s.size != y.size:
        raise ValueError("scores and labels must be equal-length vectors")
    if not np.isfinite(s).all():
        raise ValueError("scores must be finite")
    n_pos = int(np.sum(y == 1))
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError(
            "ROC and AUC need both classes present; "
            f"got {n_pos} positives and {n_neg} negatives"
        )
    return s, y, n_pos, n_neg


def roc_curve(scores, labels) -> RocCurve:
    """ROC curve with one point per distinct score plus the (0, 0) sentinel."""
    s, y, n_pos, n_neg = _check_roc_inputs(scores, labels)
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    # last index of each run of equal scores = counts at "score >= threshold"
    is_boundary = np.empty(s_sorted.size, dtype=bool)
    is_boundary[-1] = True
    is_boundary[:-1] = s_sorted[1:] != s_sorted[:-1]
    cum_tp = np.cumsum(y_sorted)
    cum_fp = np.cumsum(1 - y_sorted)
    thresholds = np.concatenate(([np.inf], s_sorted[is_boundary]))
    tpr = np.concatenate(([0.0], cum_tp[is_boundary] / n_pos))
    fpr = np.concatenate(([0.0], cum_fp[is_boundary] / n_neg))
    return RocCurve(thresholds=thresholds, fpr=fpr, tpr=tpr)


def auc(scores, labels) -> float:
    """Area under the ROC curve (trapezoidal rule)."""
    return roc_curve(scores, labels).trapezoid_area()
