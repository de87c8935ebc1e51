"""Per-class and pooled (micro) precision/recall/F1 for element classification."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True)
class ClassScore:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    labels: tuple[str, ...]
    per_class: dict[str, ClassScore]
    tp: int
    fp: int
    fn: int
    micro_precision: float
    micro_recall: float
    micro_f1: float
    macro_f1: float


def _f1(tp: int, fp: int, fn: int) -> float:
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 1.0


def confusion_matrix(predictions: Sequence, gold: Sequence, labels: Sequence) -> np.ndarray:
    """Rows gold, columns predicted."""
    index = {lab: i for i, lab in enumerate(labels)}
    m = np.zeros((len(labels), len(labels)), dtype=np.int64)
    try:
        np.add.at(m, ([index[g] for g in gold], [index[p] for p in predictions]), 1)
    except KeyError as exc:
        raise ValidationError(f"label {exc.args[0]!r} not in label set") from None
    return m


def evaluate(predictions: Sequence, gold: Sequence, labels: Sequence | None = None) -> EvalReport:
    """Score aligned predictions.

    Micro-F1 pools TP/FP/FN over classes: ``2TP / (2TP + FP + FN)``.  Per-class
    rows are one-vs-rest.  A class with no gold and no predicted items scores
    1.0 and is left out of the macro average.
    """
    if len(predictions) != len(gold):
        raise ValidationError(f"length mismatch: {len(predictions)} predictions vs {len(gold)} gold")
    if labels is None:
        labels = sorted(set(gold) | set(predictions), key=str)
    labels = tuple(labels)
    m = confusion_matrix(predictions, gold, labels)
    tp_c = np.diag(m)
    fp_c = m.sum(axis=0) - tp_c
    fn_c = m.sum(axis=1) - tp_c
    per_class = {}
    macro = []
    for i, lab in enumerate(labels):
        tp, fp, fn = int(tp_c[i]), int(fp_c[i]), int(fn_c[i])
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f = _f1(tp, fp, fn)
        per_class[lab] = ClassScore(p, r, f, tp + fn)
        if tp + fp + fn:
            macro.append(f)
    tp, fp, fn = int(tp_c.sum()), int(fp_c.sum()), int(fn_c.sum())
    return EvalReport(
        labels=labels,
        per_class=per_class,
        tp=tp, fp=fp, fn=fn,
        micro_precision=tp / (tp + fp) if tp + fp else 0.0,
        micro_recall=tp / (tp + fn) if tp + fn else 0.0,
        micro_f1=_f1(tp, fp, fn),
        macro_f1=float(np.mean(macro)) if macro else 1.0,
    )
