"""Confusion matrices and classification metrics (positive class = upward move).

Note: ``f_score`` is precision * recall, not the harmonic-mean F1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


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

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.fp + other.fp,
                               self.fn + other.fn, self.tn + other.tn)

    def as_dict(self) -> dict[str, int]:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


def confusion(predicted, actual) -> ConfusionMatrix:
    p = np.asarray(predicted)
    a = np.asarray(actual)
    if p.shape != a.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {a.shape}")
    if p.size == 0:
        raise ValueError("no predictions to evaluate")
    pp, ap = p > 0, a > 0
    return ConfusionMatrix(int(np.sum(pp & ap)), int(np.sum(pp & ~ap)),
                           int(np.sum(~pp & ap)), int(np.sum(~pp & ~ap)))


def _ratio(num, den, what):
    if den == 0:
        log.warning("%s undefined (0/0); reported as 0", what)
        return 0.0
    return num / den


def accuracy(cm: ConfusionMatrix) -> float:
    return _ratio(cm.tp + cm.tn, cm.total, "accuracy")


def precision(cm: ConfusionMatrix) -> float:
    return _ratio(cm.tp, cm.tp + cm.fp, "precision")


def recall(cm: ConfusionMatrix) -> float:
    return _ratio(cm.tp, cm.tp + cm.fn, "recall")


def f_score(cm: ConfusionMatrix) -> float:
    return precision(cm) * recall(cm)


def metrics(cm: ConfusionMatrix) -> dict[str, float]:
    return {"accuracy": accuracy(cm), "precision": precision(cm),
            "recall": recall(cm), "f_score": f_score(cm)}
