"""Classification metrics: accuracy, per-class P/R/F1, macro one-vs-rest AUC.

AUC uses the rank statistic with tie-averaged ranks; classes absent from the
truth vector are excluded from the macro mean with a warning. F1 is defined
as 0 when precision and recall are both 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: dict[object, float]
    recall: dict[object, float]
    f1: dict[object, float]
    macro_auc: float
    confusion: np.ndarray  # (k, k), rows = truth, cols = predicted
    classes: tuple

    @property
    def macro_f1(self) -> float:
        return float(np.mean(list(self.f1.values())))

    @property
    def weighted_f1(self) -> float:
        """Support-weighted mean of per-class F1 (0 when the test set is empty)."""
        supports = self.confusion.sum(axis=1)
        total = supports.sum()
        if total == 0:
            return 0.0
        return float(
            sum(self.f1[c] * supports[i] for i, c in enumerate(self.classes)) / total
        )

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_auc": self.macro_auc,
            "macro_f1": self.macro_f1,
            "per_class": {
                str(c): {
                    "precision": self.precision[c],
                    "recall": self.recall[c],
                    "f1": self.f1[c],
                }
                for c in self.classes
            },
            "confusion": self.confusion.tolist(),
            "classes": [str(c) for c in self.classes],
        }


def _tie_averaged_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks; tied scores share the average of their rank span."""
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores), dtype=np.float64)
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auc_rank(scores: np.ndarray, positives: np.ndarray) -> float:
    """One-vs-rest ROC AUC by the Mann-Whitney rank statistic."""
    positives = positives.astype(bool)
    n_pos = int(positives.sum())
    n_neg = len(positives) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUC needs at least one positive and one negative")
    ranks = _tie_averaged_ranks(np.asarray(scores, dtype=np.float64))
    return float((ranks[positives].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def compute_metrics(predicted, scores, truth, classes) -> Metrics:
    """Score predictions against truth.

    `scores` is an (n, k) class-probability matrix aligned with `classes`;
    pass None to skip AUC (macro_auc reported as nan).
    """
    classes = tuple(classes)
    predicted = list(predicted)
    truth = list(truth)
    if len(predicted) != len(truth):
        raise DataError(f"length mismatch: {len(predicted)} predictions, {len(truth)} truths")
    if scores is not None:
        scores = np.asarray(scores, dtype=np.float64)
        if scores.shape != (len(truth), len(classes)):
            raise DataError(f"scores shape {scores.shape} != ({len(truth)}, {len(classes)})")

    index = {c: i for i, c in enumerate(classes)}
    k = len(classes)
    confusion = np.zeros((k, k), dtype=np.int64)
    for t, p in zip(truth, predicted):
        confusion[index[t], index[p]] += 1

    total = confusion.sum()
    accuracy = float(np.trace(confusion) / total) if total else 0.0

    precision, recall, f1 = {}, {}, {}
    for c in classes:
        i = index[c]
        tp = confusion[i, i]
        pred_c = confusion[:, i].sum()
        true_c = confusion[i, :].sum()
        p = float(tp / pred_c) if pred_c else 0.0
        r = float(tp / true_c) if true_c else 0.0
        precision[c] = p
        recall[c] = r
        f1[c] = 2.0 * p * r / (p + r) if (p + r) > 0 else 0.0

    macro_auc = float("nan")
    if scores is not None:
        truth_idx = np.array([index[t] for t in truth])
        aucs = []
        for c in classes:
            i = index[c]
            pos = truth_idx == i
            if not pos.any():
                warnings.warn(f"class {c!r} absent from truth; excluded from macro AUC")
                continue
            if pos.all():
                warnings.warn(f"class {c!r} is the only truth class; excluded from macro AUC")
                continue
            aucs.append(auc_rank(scores[:, i], pos))
        if aucs:
            macro_auc = float(np.mean(aucs))

    return Metrics(accuracy, precision, recall, f1, macro_auc, confusion, classes)
