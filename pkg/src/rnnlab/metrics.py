"""Evaluation metrics: confusion matrix, precision/recall/F1, accuracy.

Rates are reported as percentages.  Zero-denominator cases (no predicted
positives, no true positives) define the affected score as 0 and are flagged
in the report rather than raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def confusion(preds, truth, k: int) -> np.ndarray:
    """k x k count grid; rows are true classes, columns predicted classes."""
    preds = np.asarray(preds, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if preds.shape != truth.shape:
        raise ValueError(f"length mismatch: {preds.shape} predictions vs {truth.shape} labels")
    if len(preds) and (preds.min() < 0 or preds.max() >= k or truth.min() < 0 or truth.max() >= k):
        raise ValueError(f"class indices outside [0, {k})")
    cm = np.zeros((k, k), dtype=np.int64)
    np.add.at(cm, (truth, preds), 1)
    return cm


def _prf(tp: float, fp: float, fn: float) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return 100.0 * precision, 100.0 * recall, 100.0 * f1


def binary_scores(cm: np.ndarray, positive: int = 1) -> tuple[float, float, float]:
    """Precision, recall, F1 (percent) of the positive class in a 2x2 matrix."""
    if cm.shape != (2, 2):
        raise ValueError(f"binary scores need a 2x2 matrix, got {cm.shape}")
    neg = 1 - positive
    tp = cm[positive, positive]
    fp = cm[neg, positive]
    fn = cm[positive, neg]
    return _prf(tp, fp, fn)


def per_class_scores(cm: np.ndarray) -> list[tuple[float, float, float]]:
    """One (precision, recall, f1) triple per class, one-vs-rest."""
    k = cm.shape[0]
    out = []
    for cls in range(k):
        tp = cm[cls, cls]
        fp = cm[:, cls].sum() - tp
        fn = cm[cls, :].sum() - tp
        out.append(_prf(tp, fp, fn))
    return out


def accuracy(cm: np.ndarray) -> float:
    total = cm.sum()
    return 100.0 * cm.trace() / total if total else 0.0


def multiclass_scores(cm: np.ndarray) -> tuple[float, float]:
    """(accuracy, macro-F1) in percent; macro-F1 is the unweighted mean of
    per-class F1."""
    if cm.shape[0] < 2:
        raise ValueError(f"need at least 2 classes, got {cm.shape}")
    f1s = [f1 for _, _, f1 in per_class_scores(cm)]
    return accuracy(cm), float(np.mean(f1s))


def micro_f1(cm: np.ndarray) -> float:
    """Micro-averaged F1 (percent); equals accuracy for single-label tasks."""
    tp = cm.trace()
    fp = cm.sum() - tp  # every off-diagonal entry is one FP and one FN
    p = tp / (tp + fp) if tp + fp > 0 else 0.0
    return 100.0 * p


@dataclass
class MetricsReport:
    """One experiment's headline numbers, shaped like the comparison tables."""

    accuracy: float
    precision: float
    recall: float
    f1: float
    wall_time_minutes: float
    param_count: int
    macro_f1: float | None = None
    micro_f1: float | None = None
    notes: list[str] = field(default_factory=list)

    def format_table(self, label: str = "") -> str:
        lines = []
        if label:
            lines.append(label)
        lines += [
            f"  accuracy    : {self.accuracy:7.2f} %",
            f"  precision   : {self.precision:7.2f} %",
            f"  recall      : {self.recall:7.2f} %",
            f"  F1          : {self.f1:7.2f} %",
        ]
        if self.macro_f1 is not None:
            lines.append(f"  macro F1    : {self.macro_f1:7.2f} %")
        if self.micro_f1 is not None:
            lines.append(f"  micro F1    : {self.micro_f1:7.2f} %")
        lines += [
            f"  wall time   : {self.wall_time_minutes:7.2f} min",
            f"  parameters  : {self.param_count}",
        ]
        for note in self.notes:
            lines.append(f"  note: {note}")
        return "\n".join(lines)


def report_from_confusion(
    cm: np.ndarray,
    wall_time_minutes: float,
    param_count: int,
    positive: int | None = None,
) -> MetricsReport:
    """Build a report from a confusion matrix.

    Binary tasks (``positive`` given) report the positive class's
    precision/recall/F1.  Multiclass tasks report macro-averaged values and
    carry micro-F1 alongside for comparison.
    """
    notes: list[str] = []
    if positive is not None:
        p, r, f1 = binary_scores(cm, positive=positive)
        acc = accuracy(cm)
        neg = 1 - positive
        if cm[:, positive].sum() == 0:
            notes.append("no predicted positives: precision defined as 0")
        if cm[positive, :].sum() == 0:
            notes.append("no true positives in the evaluated split")
        if cm[neg, :].sum() == 0:
            notes.append("no true negatives in the evaluated split")
        return MetricsReport(
            accuracy=acc,
            precision=p,
            recall=r,
            f1=f1,
            wall_time_minutes=wall_time_minutes,
            param_count=param_count,
            notes=notes,
        )
    acc, macro = multiclass_scores(cm)
    per_class = per_class_scores(cm)
    macro_p = float(np.mean([p for p, _, _ in per_class]))
    macro_r = float(np.mean([r for _, r, _ in per_class]))
    return MetricsReport(
        accuracy=acc,
        precision=macro_p,
        recall=macro_r,
        f1=macro,
        wall_time_minutes=wall_time_minutes,
        param_count=param_count,
        macro_f1=macro,
        micro_f1=micro_f1(cm),
        notes=notes,
    )
