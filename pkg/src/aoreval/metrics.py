"""Overlap series, success/precision curves, AUC and average overlap (AOR)."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from .errors import EmptyInput, EmptySeries, NonConvexPolygon
from .geometry import (
    BoundingBox,
    QuadAnnotation,
    center_error,
    quad_iou,
    quad_to_rect,
    rect_iou,
)
from .ingest import ABSENT, AlignedPair

logger = logging.getLogger(__name__)

ABSENT_POLICIES = ("skip", "count-as-zero")
OVERLAP_MODES = ("quad-exact", "rect-envelope")
AUC_METHODS = ("mean", "trapezoid")

OTB_SUCCESS_THRESHOLDS = 21
OTB_PRECISION_MAX = 50
PRECISION_REPORT_THRESHOLD = 20


@dataclass(frozen=True)
class OverlapSeries:
    sequence_name: str
    tracker_name: str
    values: Tuple[float, ...]
    skipped: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class SuccessCurve:
    thresholds: Tuple[float, ...]
    success_rates: Tuple[float, ...]
    auc: float


@dataclass(frozen=True)
class PrecisionCurve:
    thresholds: Tuple[float, ...]
    precisions: Tuple[float, ...]
    precision_at_20: float


@dataclass(frozen=True)
class SequenceScore:
    sequence_name: str
    tracker_name: str
    aor: float
    frame_count: int


@dataclass(frozen=True)
class AggregateScore:
    tracker_name: str
    pooled_aor: float
    macro_aor: float
    aor_variance: float
    auc_otb: float
    sequence_count: int
    frame_count: int


def _as_box(frame) -> BoundingBox:
    return quad_to_rect(frame) if isinstance(frame, QuadAnnotation) else frame


def frame_overlap(gt, pred, mode: str = "quad-exact") -> float:
    """Overlap of two non-absent frames.

    Rect/rect pairs always use the box formula. When either side is a quad,
    ``quad-exact`` clips polygons and ``rect-envelope`` compares axis-aligned
    envelopes. A non-convex quad falls back to the envelope comparison.
    """
    if isinstance(gt, BoundingBox) and isinstance(pred, BoundingBox):
        return rect_iou(gt, pred)
    if mode == "rect-envelope":
        return rect_iou(_as_box(gt), _as_box(pred))
    qa = gt if isinstance(gt, QuadAnnotation) else _box_quad(gt)
    qb = pred if isinstance(pred, QuadAnnotation) else _box_quad(pred)
    if qa is None or qb is None:
        return rect_iou(_as_box(gt), _as_box(pred))
    try:
        return quad_iou(qa, qb)
    except NonConvexPolygon as exc:
        logger.warning("%s; using rectangle envelopes", exc)
        return rect_iou(_as_box(gt), _as_box(pred))


def _box_quad(box: BoundingBox):
    # zero-area boxes cannot be quads; they overlap nothing
    return box.to_quad() if box.area > 0 else None


def overlap_series(
    pair: AlignedPair,
    absent_policy: str = "skip",
    tracker_name: str = "",
    mode: str = "quad-exact",
    skip_first_frame: bool = False,
) -> OverlapSeries:
    """Per-frame overlaps of an aligned pair.

    Frames with absent ground truth are always dropped. A present ground
    truth with an absent prediction is dropped under ``skip`` and scores 0
    under ``count-as-zero``; ``skipped`` counts every dropped frame.
    """
    if absent_policy not in ABSENT_POLICIES:
        raise ValueError(f"absent_policy must be one of {ABSENT_POLICIES}")
    values = []
    skipped = 0
    frames = pair.frames[1:] if skip_first_frame else pair.frames
    for gt, pred in frames:
        if gt is ABSENT:
            skipped += 1
        elif pred is ABSENT:
            if absent_policy == "count-as-zero":
                values.append(0.0)
            else:
                skipped += 1
        else:
            values.append(frame_overlap(gt, pred, mode))
    if not values:
        raise EmptySeries(f"{pair.sequence_name}: no evaluable frames")
    return OverlapSeries(pair.sequence_name, tracker_name, tuple(values), skipped)


def _values(series) -> Tuple[float, ...]:
    values = series.values if isinstance(series, OverlapSeries) else tuple(series)
    if not values:
        name = getattr(series, "sequence_name", "")
        raise EmptySeries(f"{name}: empty overlap series".lstrip(": "))
    return values


def mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def aor(series: OverlapSeries) -> SequenceScore:
    """Average overlap ratio of one sequence."""
    values = _values(series)
    return SequenceScore(series.sequence_name, series.tracker_name, mean(values), len(values))


def success_thresholds(num_thresholds: int) -> np.ndarray:
    if num_thresholds < 2:
        raise ValueError("num_thresholds must be at least 2")
    return np.linspace(0.0, 1.0, num_thresholds)


def _auc(thresholds: np.ndarray, rates: np.ndarray, method: str) -> float:
    if method == "mean":
        return math.fsum(rates.tolist()) / len(rates)
    if method == "trapezoid":
        widths = np.diff(thresholds)
        return float(np.sum(widths * (rates[1:] + rates[:-1]) / 2.0))
    raise ValueError(f"auc method must be one of {AUC_METHODS}")


def success_curve(
    series: OverlapSeries,
    num_thresholds: int = OTB_SUCCESS_THRESHOLDS,
    strict: bool = True,
    auc_method: str = "mean",
) -> SuccessCurve:
    """Fraction of frames whose overlap clears each of ``num_thresholds``
    uniform thresholds on [0, 1]; ``strict`` selects ``>`` over ``>=``."""
    values = np.sort(np.asarray(_values(series), dtype=float))
    thresholds = success_thresholds(num_thresholds)
    side = "right" if strict else "left"
    n = len(values)
    rates = (n - np.searchsorted(values, thresholds, side=side)) / n
    return SuccessCurve(
        tuple(thresholds.tolist()),
        tuple(rates.tolist()),
        _auc(thresholds, rates, auc_method),
    )


def auc_aor_gap(
    series: OverlapSeries,
    num_thresholds: int = OTB_SUCCESS_THRESHOLDS,
    strict: bool = True,
    auc_method: str = "mean",
) -> float:
    """Success-plot AUC minus AOR: the discretization error of the AUC."""
    curve = success_curve(series, num_thresholds, strict, auc_method)
    return curve.auc - mean(_values(series))


def center_errors(pair: AlignedPair, skip_first_frame: bool = False) -> Tuple[float, ...]:
    frames = pair.frames[1:] if skip_first_frame else pair.frames
    return tuple(
        center_error(_as_box(g), _as_box(p))
        for g, p in frames
        if g is not ABSENT and p is not ABSENT
    )


def precision_curve(
    pair: AlignedPair,
    max_threshold: int = OTB_PRECISION_MAX,
    skip_first_frame: bool = False,
) -> PrecisionCurve:
    """Fraction of frames with center error within 0..``max_threshold`` px.

    Quads are compared through the centers of their axis-aligned envelopes.
    """
    errors = center_errors(pair, skip_first_frame)
    if not errors:
        raise EmptySeries(f"{pair.sequence_name}: no frame with both boxes present")
    errs = np.sort(np.asarray(errors, dtype=float))
    thresholds = np.arange(0, max_threshold + 1, dtype=float)
    precisions = np.searchsorted(errs, thresholds, side="right") / len(errs)
    at_20 = float(np.searchsorted(errs, PRECISION_REPORT_THRESHOLD, side="right") / len(errs))
    return PrecisionCurve(tuple(thresholds.tolist()), tuple(precisions.tolist()), at_20)


def sorted_overlap_bars(series: OverlapSeries) -> Tuple[float, ...]:
    """Overlaps sorted in descending order (the bar-chart view of AOR)."""
    return tuple(sorted(_values(series), reverse=True))


def aggregate(
    scores: Sequence[SequenceScore],
    series: Iterable[OverlapSeries],
    num_thresholds: int = OTB_SUCCESS_THRESHOLDS,
    strict: bool = True,
) -> AggregateScore:
    """Dataset-level scores for one tracker.

    ``pooled_aor`` weights every frame equally, ``macro_aor`` weights every
    sequence equally, and ``aor_variance`` is the population variance of the
    sequence AORs.
    """
    if not scores:
        raise EmptyInput("no sequence scores to aggregate")
    # sort so that input order cannot affect floating point summation
    ordered = sorted(series, key=lambda s: s.sequence_name)
    pooled_values = [v for s in ordered for v in s.values]
    if not pooled_values:
        raise EmptyInput("no overlap values to aggregate")
    seq_aors = [s.aor for s in sorted(scores, key=lambda s: s.sequence_name)]
    macro = mean(seq_aors)
    variance = math.fsum((a - macro) ** 2 for a in seq_aors) / len(seq_aors)
    pooled = OverlapSeries("*", scores[0].tracker_name, tuple(pooled_values))
    curve = success_curve(pooled, num_thresholds, strict)
    return AggregateScore(
        tracker_name=scores[0].tracker_name,
        pooled_aor=mean(pooled_values),
        macro_aor=macro,
        aor_variance=variance,
        auc_otb=curve.auc,
        sequence_count=len(seq_aors),
        frame_count=len(pooled_values),
    )
