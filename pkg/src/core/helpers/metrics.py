from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from src.core.errors import UsageError
from src.core.schemas.MetricSet import MetricSet

AVERAGE_MODES = ("macro", "weighted")
LABEL_SETS = ("all", "present")


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[g][p] = number of examples with gold label g predicted as p."""

    counts: np.ndarray

    @property
    def num_labels(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion_matrix(golds: Sequence[int], preds: Sequence[int], num_labels: int) -> ConfusionMatrix:
    golds = np.asarray(golds, dtype=np.int64).reshape(-1)
    preds = np.asarray(preds, dtype=np.int64).reshape(-1)
    if golds.shape != preds.shape:
        raise UsageError(f"golds and preds differ in length: {golds.size} vs {preds.size}")
    if num_labels < 1:
        raise UsageError("num_labels must be positive")
    for name, ids in (("gold", golds), ("pred", preds)):
        if ids.size and (ids.min() < 0 or ids.max() >= num_labels):
            raise UsageError(f"{name} label id outside [0, {num_labels})")
    counts = np.zeros((num_labels, num_labels), dtype=np.int64)
    np.add.at(counts, (golds, preds), 1)
    return ConfusionMatrix(counts=counts)


def per_class_scores(cm: ConfusionMatrix) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-class precision, recall and F1; undefined ratios are 0."""
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    predicted = counts.sum(axis=0)
    actual = counts.sum(axis=1)
    precision = np.divide(tp, predicted, out=np.zeros_like(tp), where=predicted > 0)
    recall = np.divide(tp, actual, out=np.zeros_like(tp), where=actual > 0)
    denom = precision + recall
    f1 = np.divide(2.0 * precision * recall, denom, out=np.zeros_like(tp), where=denom > 0)
    return precision, recall, f1


def compute_metrics(cm: ConfusionMatrix, average: str = "macro", labels: str = "all") -> MetricSet:
    """
    Accuracy plus averaged precision, recall and F1.

    Macro averaging (default) takes the unweighted mean over all classes,
    including classes never predicted or never present. With labels="present"
    the macro mean only covers classes that occur among the gold labels or
    the predictions. Weighted averaging weights each class by its gold support.

    Args:
        cm (ConfusionMatrix): Counts for the evaluated examples.
        average (str): "macro" or "weighted".
        labels (str): "all" classes or only those "present" in golds or preds.

    Returns:
        MetricSet
    """
    if average not in AVERAGE_MODES:
        raise UsageError(f"unknown averaging mode {average!r}; expected one of {AVERAGE_MODES}")
    if labels not in LABEL_SETS:
        raise UsageError(f"unknown label set {labels!r}; expected one of {LABEL_SETS}")
    total = cm.total
    if total <= 0:
        raise UsageError("cannot compute metrics from an empty confusion matrix")

    precision, recall, f1 = per_class_scores(cm)
    accuracy = float(np.trace(cm.counts)) / total
    support = cm.counts.sum(axis=1).astype(np.float64)
    if labels == "present":
        counted = (support > 0) | (cm.counts.sum(axis=0) > 0)
    else:
        counted = np.ones(cm.num_labels, dtype=bool)

    def reduce(scores: np.ndarray) -> float:
        if average == "macro":
            value = float(scores[counted].mean())
        else:
            value = float((support * scores).sum() / total)
        return min(1.0, max(0.0, value))

    return MetricSet(
        accuracy=accuracy,
        precision=reduce(precision),
        recall=reduce(recall),
        f1=reduce(f1),
    )
