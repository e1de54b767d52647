"""Per-class precision/recall/F1 and the unweighted (macro) F1."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, UsageError


@dataclass
class MetricsReport:
    labels: list[str]
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    confusion: np.ndarray     # rows: true class, cols: predicted class
    macro_f1: float
    accuracy: float

    def format_table(self) -> str:
        width = max([len("label")] + [len(l) for l in self.labels])
        lines = [f"{'label':<{width}}  precision  recall     f1  support"]
        for k, label in enumerate(self.labels):
            lines.append(f"{label:<{width}}  {self.precision[k]:9.4f}  {self.recall[k]:6.4f}  "
                         f"{self.f1[k]:6.4f}  {int(self.support[k]):7d}")
        lines.append(f"macro_f1={self.macro_f1:.6f}")
        lines.append(f"accuracy={self.accuracy:.6f}")
        return "\n".join(lines)


def confusion_matrix(y_true, y_pred, num_classes: int) -> np.ndarray:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise DataError(f"{y_true.size} labels but {y_pred.size} predictions")
    for name, y in (("label", y_true), ("prediction", y_pred)):
        if y.size and (y.min() < 0 or y.max() >= num_classes):
            raise DataError(f"{name} id outside [0, {num_classes})")
    return np.bincount(y_true * num_classes + y_pred, minlength=num_classes * num_classes).reshape(
        num_classes, num_classes)


def report(y_true, y_pred, labels: list[str]) -> MetricsReport:
    """Score predictions over every class in ``labels``.

    Classes absent from both truth and predictions still count in the
    macro mean, with F1 = 0. Any zero denominator yields 0.
    """
    k = len(labels)
    if len(y_true) == 0:
        raise UsageError("cannot score an empty data set")
    cm = confusion_matrix(y_true, y_pred, k)
    tp = np.diag(cm).astype(np.float64)
    predicted = cm.sum(axis=0)
    actual = cm.sum(axis=1)
    precision = np.divide(tp, predicted, out=np.zeros(k), where=predicted > 0)
    recall = np.divide(tp, actual, out=np.zeros(k), where=actual > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros(k), where=denom > 0)
    return MetricsReport(
        labels=list(labels),
        precision=precision,
        recall=recall,
        f1=f1,
        support=actual,
        confusion=cm,
        # summed in class order so the result does not depend on numpy's blocked reduction
        macro_f1=sum(f1.tolist()) / k,
        accuracy=float(tp.sum() / cm.sum()),
    )


def macro_f1(y_true, y_pred, num_classes: int) -> float:
    return report(y_true, y_pred, [str(i) for i in range(num_classes)]).macro_f1
