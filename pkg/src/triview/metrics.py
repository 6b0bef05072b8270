"""Confusion matrix and precision / recall / F1 / accuracy.

The positive class is 1 (ponzi). Ratios with a zero denominator are ``None``
rather than 0 or NaN.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = ["LengthMismatch", "ConfusionMatrix", "Metrics", "confusion", "metrics", "report"]


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class Metrics:
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    accuracy: Optional[float]


def confusion(predictions: Sequence[int], labels: Sequence[int]) -> ConfusionMatrix:
    pred = np.asarray(predictions, dtype=np.int64).ravel()
    true = np.asarray(labels, dtype=np.int64).ravel()
    if pred.size != true.size:
        raise LengthMismatch(f"{pred.size} predictions for {true.size} labels")
    for name, arr in (("predictions", pred), ("labels", true)):
        if not np.all((arr == 0) | (arr == 1)):
            raise ValueError(f"{name} must be 0 or 1")
    return ConfusionMatrix(
        tp=int(np.sum((pred == 1) & (true == 1))),
        fp=int(np.sum((pred == 1) & (true == 0))),
        fn=int(np.sum((pred == 0) & (true == 1))),
        tn=int(np.sum((pred == 0) & (true == 0))),
    )


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


def metrics(cm: ConfusionMatrix) -> Metrics:
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return Metrics(precision, recall, f1, _ratio(cm.tp + cm.tn, cm.total))


def report(cm: ConfusionMatrix) -> dict:
    """Serializable report: ratios x100 rounded to 1 decimal, raw counts."""
    m = metrics(cm)
    out = {k: (None if v is None else round(100.0 * v, 1)) for k, v in asdict(m).items()}
    out.update(asdict(cm))
    return out
