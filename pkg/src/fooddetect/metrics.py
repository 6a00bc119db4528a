"""Confusion counts, accuracy/rate computation, and FP/FN sample reporting.

Food (+1) is the positive class. Rates whose denominator is zero come
back as None rather than 0 or NaN, so single-class evaluation sets never
corrupt downstream averages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, ValidationError


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class EvalReport:
    confusion: Confusion
    acc: float | None
    tpr: float | None
    tnr: float | None
    fp_ids: tuple[str, ...]
    fn_ids: tuple[str, ...]


def _rates(c: Confusion) -> tuple[float | None, float | None, float | None]:
    acc = (c.tp + c.tn) / c.total if c.total > 0 else None
    tpr = c.tp / (c.tp + c.fn) if (c.tp + c.fn) > 0 else None
    tnr = c.tn / (c.tn + c.fp) if (c.tn + c.fp) > 0 else None
    return acc, tpr, tnr


def confusion(pred: np.ndarray, truth: np.ndarray, ids) -> EvalReport:
    """Score +/-1 predictions against +/-1 truth, keeping FP/FN ids in order."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    ids = tuple(ids)
    if pred.shape != truth.shape or pred.ndim != 1 or len(ids) != pred.shape[0]:
        raise ShapeError(
            f"pred/truth/ids lengths disagree: {pred.shape}, {truth.shape}, {len(ids)}"
        )
    for name, v in (("pred", pred), ("truth", truth)):
        if v.size and not np.all(np.isin(v, (-1, 1))):
            raise ValidationError(f"{name} must contain only +1/-1")
    tp = int(np.sum((pred == 1) & (truth == 1)))
    fp = int(np.sum((pred == 1) & (truth == -1)))
    tn = int(np.sum((pred == -1) & (truth == -1)))
    fn = int(np.sum((pred == -1) & (truth == 1)))
    fp_ids = tuple(ids[i] for i in np.flatnonzero((pred == 1) & (truth == -1)))
    fn_ids = tuple(ids[i] for i in np.flatnonzero((pred == -1) & (truth == 1)))
    c = Confusion(tp=tp, fp=fp, tn=tn, fn=fn)
    acc, tpr, tnr = _rates(c)
    return EvalReport(confusion=c, acc=acc, tpr=tpr, tnr=tnr, fp_ids=fp_ids, fn_ids=fn_ids)


def weighted_merge(reports: list[tuple[EvalReport, int, int]]) -> EvalReport:
    """Combine per-dataset reports into a joint one by summing confusions.

    Each item carries its (positive_count, negative_count) which must
    agree with the report's own confusion; rates are recomputed from the
    summed counts, never averaged.
    """
    if not reports:
        raise ValidationError("weighted_merge needs at least one report")
    tp = fp = tn = fn = 0
    fp_ids: list[str] = []
    fn_ids: list[str] = []
    for report, pos, neg in reports:
        c = report.confusion
        if pos != c.tp + c.fn or neg != c.tn + c.fp:
            raise ValidationError(
                f"stated counts ({pos}, {neg}) disagree with confusion "
                f"({c.tp + c.fn}, {c.tn + c.fp})"
            )
        tp += c.tp
        fp += c.fp
        tn += c.tn
        fn += c.fn
        fp_ids.extend(report.fp_ids)
        fn_ids.extend(report.fn_ids)
    c = Confusion(tp=tp, fp=fp, tn=tn, fn=fn)
    acc, tpr, tnr = _rates(c)
    return EvalReport(
        confusion=c, acc=acc, tpr=tpr, tnr=tnr, fp_ids=tuple(fp_ids), fn_ids=tuple(fn_ids)
    )


def report_csv_lines(report: EvalReport) -> list[str]:
    """metric,value rows; rates as full-precision fractions, undefined spelled out."""

    def fmt(v: float | None) -> str:
        return "undefined" if v is None else format(v, ".17g")

    c = report.confusion
    return [
        "metric,value",
        f"tp,{c.tp}",
        f"fp,{c.fp}",
        f"tn,{c.tn}",
        f"fn,{c.fn}",
        f"acc,{fmt(report.acc)}",
        f"tpr,{fmt(report.tpr)}",
        f"tnr,{fmt(report.tnr)}",
    ]


def format_percent(v: float | None) -> str:
    """Human-facing rendering: percentages with 2 decimals."""
    return "undefined" if v is None else f"{100.0 * v:.2f}%"
