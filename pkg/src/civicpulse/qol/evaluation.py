"""Classifier evaluation: per-class metrics, ROC curves, AUC.

Per-class precision/recall are one-vs-rest, as is the per-class accuracy
(true positives plus true negatives over all rows).  The overall accuracy
is the plain multiclass accuracy.  ROC curves sweep the class-probability
threshold; AUC integrates them with the trapezoid rule and the macro
average runs over the classes where the curve is defined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ComputationError
from .features import FeatureMatrix, N_CLASSES
from .network import TrainedModel, predict_proba


def roc_curve(
    positives: np.ndarray, scores: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(fpr, tpr, thresholds) from sweeping the score threshold downwards.

    Needs at least one positive and one negative row.  The curve starts at
    (0, 0) and ends at (1, 1); equal scores collapse into one point.
    """
    positives = np.asarray(positives, dtype=bool)
    n_pos = int(positives.sum())
    n_neg = int((~positives).sum())
    if n_pos == 0 or n_neg == 0:
        raise ComputationError("ROC needs at least one positive and one negative")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = positives[order]

    tps = np.cumsum(sorted_pos)
    fps = np.cumsum(~sorted_pos)
    # Keep only the last row of each tied-score block.
    boundary = np.flatnonzero(np.diff(sorted_scores) != 0)
    keep = np.r_[boundary, len(sorted_scores) - 1]

    tpr = np.r_[0.0, tps[keep] / n_pos]
    fpr = np.r_[0.0, fps[keep] / n_neg]
    thresholds = np.r_[np.inf, sorted_scores[keep]]
    return fpr, tpr, thresholds


def auc_trapezoid(fpr: np.ndarray, tpr: np.ndarray) -> float:
    return float(np.trapz(tpr, fpr))


@dataclass
class ClassMetrics:
    label: int
    support: int
    recall: float | None
    precision: float | None
    one_vs_rest_accuracy: float
    auc: float | None
    roc_fpr: list[float] = field(default_factory=list)
    roc_tpr: list[float] = field(default_factory=list)
    roc_thresholds: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "class": self.label,
            "support": self.support,
            "recall": self.recall,
            "precision": self.precision,
            "one_vs_rest_accuracy": self.one_vs_rest_accuracy,
            "auc": self.auc,
            "roc": {
                "fpr": self.roc_fpr,
                "tpr": self.roc_tpr,
                "thresholds": self.roc_thresholds,
            },
        }


@dataclass
class EvalReport:
    """Per-class and overall test-set metrics plus the confusion matrix."""

    per_class: list[ClassMetrics]
    confusion: np.ndarray
    accuracy: float
    recall_macro: float | None
    precision_macro: float | None
    auc_macro: float | None
    n_rows: int
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "accuracy": self.accuracy,
            "recall_macro": self.recall_macro,
            "precision_macro": self.precision_macro,
            "auc_macro": self.auc_macro,
            "confusion": self.confusion.tolist(),
            "per_class": [m.to_dict() for m in self.per_class],
            "notes": self.notes,
        }


def _macro(values: list[float | None]) -> float | None:
    defined = [v for v in values if v is not None]
    return sum(defined) / len(defined) if defined else None


def evaluate(model: TrainedModel, X_test: FeatureMatrix) -> EvalReport:
    """Score the model on an untouched test matrix."""
    if X_test.n_rows == 0:
        raise ComputationError("empty test matrix")
    probs = predict_proba(model, X_test.features)
    predicted = np.argmax(probs, axis=1) + 1
    actual = X_test.labels
    n = X_test.n_rows

    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for a, p in zip(actual, predicted):
        confusion[a - 1, p - 1] += 1

    notes: list[str] = []
    per_class: list[ClassMetrics] = []
    for label in range(1, N_CLASSES + 1):
        is_pos = actual == label
        support = int(is_pos.sum())
        tp = int(((predicted == label) & is_pos).sum())
        fp = int(((predicted == label) & ~is_pos).sum())
        tn = int(((predicted != label) & ~is_pos).sum())

        recall = tp / support if support > 0 else None
        if support == 0:
            notes.append(f"class {label}: zero test support, metrics undefined")
        predicted_count = tp + fp
        precision = tp / predicted_count if predicted_count > 0 else None
        if predicted_count == 0 and support > 0:
            notes.append(f"class {label}: never predicted, precision undefined")
        ovr_accuracy = (tp + tn) / n

        auc_value = None
        fpr_list: list[float] = []
        tpr_list: list[float] = []
        thr_list: list[float] = []
        if 0 < support < n:
            fpr, tpr, thresholds = roc_curve(is_pos, probs[:, label - 1])
            auc_value = auc_trapezoid(fpr, tpr)
            fpr_list = fpr.tolist()
            tpr_list = tpr.tolist()
            thr_list = thresholds.tolist()
        elif support == n:
            notes.append(f"class {label}: no negatives, ROC undefined")

        per_class.append(
            ClassMetrics(
                label=label,
                support=support,
                recall=recall,
                precision=precision,
                one_vs_rest_accuracy=ovr_accuracy,
                auc=auc_value,
                roc_fpr=fpr_list,
                roc_tpr=tpr_list,
                roc_thresholds=thr_list,
            )
        )

    return EvalReport(
        per_class=per_class,
        confusion=confusion,
        accuracy=float((predicted == actual).sum() / n),
        recall_macro=_macro([m.recall for m in per_class]),
        precision_macro=_macro([m.precision for m in per_class]),
        auc_macro=_macro([m.auc for m in per_class]),
        n_rows=n,
        notes=notes,
    )
