"""Contingency tables, the rates derived from them, and ROC AUC."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .ingest import InvalidInputError, NEGATIVE, POSITIVE


@dataclass(frozen=True)
class ContingencyTable:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise InvalidInputError("contingency counts must be non-negative")

    @property
    def P(self) -> int:
        return self.tp + self.fn

    @property
    def N(self) -> int:
        return self.fp + self.tn

    @property
    def yes(self) -> int:
        return self.tp + self.fp

    @property
    def no(self) -> int:
        return self.fn + self.tn

    @property
    def total(self) -> int:
        return self.P + self.N


@dataclass(frozen=True)
class Rates:
    tpr: float
    fpr: float
    tnr: float
    precision: float   # nan when nothing was predicted positive
    accuracy: float


def _is_pos(v, positive) -> bool:
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    return v == positive


def contingency(predicted: Sequence, truth: Sequence, positive=POSITIVE) -> ContingencyTable:
    """Count TP/FP/FN/TN; labels equal to ``positive`` (or ``True``) are positive."""
    if len(predicted) != len(truth):
        raise InvalidInputError("predicted and truth lengths differ")
    if len(predicted) == 0:
        raise InvalidInputError("no predictions to tabulate")
    tp = fp = fn = tn = 0
    for p, t in zip(predicted, truth):
        p, t = _is_pos(p, positive), _is_pos(t, positive)
        if p and t:
            tp += 1
        elif p:
            fp += 1
        elif t:
            fn += 1
        else:
            tn += 1
    return ContingencyTable(tp, fp, fn, tn)


def rates(t: ContingencyTable) -> Rates:
    if t.P == 0 or t.N == 0:
        raise InvalidInputError("rates need at least one positive and one negative truth")
    precision = t.tp / t.yes if t.yes > 0 else math.nan
    return Rates(t.tp / t.P, t.fp / t.N, t.tn / t.N, precision, (t.tp + t.tn) / t.total)


def _roc_counts(scores, truth, positive):
    scores = np.asarray(scores, dtype=np.float64)
    pos = np.array([_is_pos(t, positive) for t in truth], dtype=bool)
    if scores.shape != pos.shape or scores.ndim != 1:
        raise InvalidInputError("scores and truth must be 1-D and equally long")
    if not np.all(np.isfinite(scores)):
        raise InvalidInputError("scores must be finite")
    n_pos = int(pos.sum())
    n_neg = pos.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise InvalidInputError("ROC needs at least one positive and one negative")
    order = np.argsort(-scores, kind="mergesort")
    s, p = scores[order], pos[order]
    # last index of each run of tied scores
    ends = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tps = np.r_[0, np.cumsum(p, dtype=np.int64)[ends]]
    fps = np.r_[0, np.cumsum(~p, dtype=np.int64)[ends]]
    return tps, fps, n_pos, n_neg


def roc_curve(scores, truth, positive=POSITIVE) -> tuple[np.ndarray, np.ndarray]:
    """ROC vertices ``(fpr, tpr)``, one per distinct score, from (0, 0) to (1, 1)."""
    tps, fps, n_pos, n_neg = _roc_counts(scores, truth, positive)
    return fps / n_neg, tps / n_pos


def roc_auc(scores, truth, positive=POSITIVE) -> float:
    """Trapezoidal area under the ROC curve; tied scores form one vertex.

    The trapezoids are summed in integer counts and divided once, so the
    result is the correctly rounded tie-adjusted Mann-Whitney statistic.
    """
    tps, fps, n_pos, n_neg = _roc_counts(scores, truth, positive)
    twice_area = int(np.sum(np.diff(fps) * (tps[1:] + tps[:-1])))
    return twice_area / (2 * n_pos * n_neg)


def metrics_record(scores, predicted, truth, positive=POSITIVE) -> dict:
    """Counts, rates and AUC for one set of test predictions."""
    table = contingency(predicted, truth, positive)
    r = rates(table)
    return {"tp": table.tp, "fp": table.fp, "fn": table.fn, "tn": table.tn,
            "tpr": r.tpr, "fpr": r.fpr, "tnr": r.tnr, "precision": r.precision,
            "accuracy": r.accuracy, "auc": roc_auc(scores, truth, positive)}


def binary_truth(labels: Iterable, positive=POSITIVE) -> list[str]:
    return [POSITIVE if _is_pos(v, positive) else NEGATIVE for v in labels]
