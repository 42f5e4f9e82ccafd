"""Evaluators for the five task tracks.

All metrics return plain fractions (recall, AP, and edit distance live in
[0, 1]; displacements are in pixels). Rendering to percent happens at the
reporting layer, never here. Matching everywhere is greedy in score order:
ties keep input order, each ground-truth item is matched at most once, and
a prediction takes the highest-overlap unmatched item. Average precision
uses all-point interpolation (the running precision envelope).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Mapping, Sequence

import numpy as np

from .errors import DataError
from .model import (
    ActionLabel,
    BoundingBox,
    Detection,
    HandKeyframes,
    LtaForecast,
    MomentInstance,
    RankedSegment,
    StaInstance,
    TemporalSegment,
    _require,
)
from .runtime import ordered_map

# Track-conventional threshold grids.
DEFAULT_MAP_TIOUS = (0.1, 0.2, 0.3, 0.4, 0.5)
BOX_AP_IOUS = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))

STA_CRITERIA = ("noun", "noun_verb", "noun_ttc", "overall")

ED_MODES = ("verb", "noun", "action")

REPORT_FAMILIES = ("percent", "pixels", "edit")


@dataclass(frozen=True, eq=False)
class MetricReport:
    """One evaluated metric with its per-key breakdown."""

    name: str
    value: float
    breakdown: Mapping[str, float] = field(default_factory=dict)
    count: int = 0
    family: str = "percent"

    def __post_init__(self) -> None:
        _require(isinstance(self.name, str) and self.name != "", "name must be a non-empty string")
        _require(math.isfinite(self.value), f"value must be finite, got {self.value!r}")
        _require(isinstance(self.count, int) and self.count >= 0, "count must be an int >= 0")
        _require(self.family in REPORT_FAMILIES, f"family must be one of {REPORT_FAMILIES}")
        items = dict(self.breakdown)
        _require(all(isinstance(k, str) and math.isfinite(v) for k, v in items.items()), "breakdown must map strings to finite reals")
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "breakdown", items)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MetricReport):
            return NotImplemented
        return (
            self.name == other.name
            and self.value == other.value
            and dict(self.breakdown) == dict(other.breakdown)
            and self.count == other.count
            and self.family == other.family
        )


def temporal_iou(a: TemporalSegment, b: TemporalSegment) -> float:
    """Intersection over union of two segments.

    Two zero-length segments overlap fully (1.0) only when they are the same
    point; a zero-length segment against a proper one never overlaps.
    """
    inter = max(0.0, min(a.end_s, b.end_s) - max(a.start_s, b.start_s))
    union = a.length_s + b.length_s - inter
    if union <= 0.0:
        return 1.0 if a.start_s == b.start_s else 0.0
    return inter / union


def box_iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes; zero-area boxes match nothing."""
    iw = max(0.0, min(a.x2, b.x2) - max(a.x1, b.x1))
    ih = max(0.0, min(a.y2, b.y2) - max(a.y1, b.y1))
    inter = iw * ih
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def _ranked(items: Sequence[Any], score_of: Callable[[Any], float]) -> list[int]:
    # Descending score; equal scores keep input order.
    return sorted(range(len(items)), key=lambda i: (-score_of(items[i]), i))


def recall_at_k(
    preds: Mapping[Hashable, Sequence[RankedSegment]],
    gts: Mapping[Hashable, Sequence[Any]],
    k: int,
    tiou_thresh: float,
) -> float:
    """Fraction of ground-truth segments hit by a top-k prediction.

    Predictions and ground truth are grouped under a shared label key (a
    class id, a query id, or any composite). A ground-truth segment counts
    as recalled when any of the k highest-scored predictions under its label
    reaches the tIoU threshold.
    """
    _require(isinstance(k, int) and k >= 1, "k must be an int >= 1")
    _require(0 < tiou_thresh <= 1, f"tiou_thresh must be in (0, 1], got {tiou_thresh}")
    total = sum(len(v) for v in gts.values())
    if total == 0:
        raise ValueError("recall is undefined with no ground-truth instances")
    hits = 0
    for label, instances in gts.items():
        candidates = list(preds.get(label, ()))
        order = _ranked(candidates, lambda p: p.score)[:k]
        top = [candidates[i] for i in order]
        for inst in instances:
            if any(temporal_iou(p.segment, inst.segment) >= tiou_thresh for p in top):
                hits += 1
    return hits / total


def recall_at_kx(
    preds: Mapping[Hashable, Sequence[RankedSegment]],
    gts: Mapping[Hashable, Sequence[Any]],
    kx: int,
    tiou_thresh: float,
) -> float:
    """Recall where the prediction budget scales with the label's support.

    A label with n ground-truth instances gets kx * n top predictions; this
    is the convention for moment retrieval, where a class can occur several
    times per video and a flat k would cap recall below one.
    """
    _require(isinstance(kx, int) and kx >= 1, "kx must be an int >= 1")
    total = sum(len(v) for v in gts.values())
    if total == 0:
        raise ValueError("recall is undefined with no ground-truth instances")
    hits = 0.0
    for label, instances in gts.items():
        if not instances:
            continue
        group = {label: instances}
        budget = kx * len(instances)
        hits += recall_at_k({label: preds.get(label, ())}, group, budget, tiou_thresh) * len(instances)
    return hits / total


def _ap_from_tp(tp: np.ndarray, npos: int) -> float:
    # All-point interpolated AP from per-rank hit flags.
    if npos == 0:
        raise ValueError("AP is undefined with no positives")
    if tp.size == 0:
        return 0.0
    tp_cum = np.cumsum(tp)
    fp_cum = np.cumsum(1.0 - tp)
    recall = tp_cum / npos
    precision = tp_cum / (tp_cum + fp_cum)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    prev = np.concatenate([[0.0], recall[:-1]])
    return float(np.sum((recall - prev) * envelope))


def _greedy_class_ap(
    entries: Sequence[tuple[float, int, Hashable, Any]],
    gts_by_group: Mapping[Hashable, Sequence[Any]],
    iou_fn: Callable[[Any, Any], float],
    iou_thresh: float,
    pair_ok: Callable[[Any, Any], bool] | None = None,
) -> float:
    # entries: (score, input_order, group, prediction) for one class.
    npos = sum(len(v) for v in gts_by_group.values())
    ranked = sorted(entries, key=lambda e: (-e[0], e[1]))
    used: dict[Hashable, list[bool]] = {g: [False] * len(v) for g, v in gts_by_group.items()}
    tp = np.zeros(len(ranked))
    for r, (_, _, group, pred) in enumerate(ranked):
        pool = gts_by_group.get(group, ())
        flags = used.get(group, [])
        best_iou = -1.0
        best_j = -1
        for j, gt in enumerate(pool):
            if flags[j]:
                continue
            if pair_ok is not None and not pair_ok(pred, gt):
                continue
            overlap = iou_fn(pred, gt)
            if overlap >= iou_thresh and overlap > best_iou:
                best_iou = overlap
                best_j = j
        if best_j >= 0:
            flags[best_j] = True
            tp[r] = 1.0
    return _ap_from_tp(tp, npos)


def _detection_map(
    preds: Mapping[Hashable, Sequence[Any]],
    gts: Mapping[Hashable, Sequence[Any]],
    class_of: Callable[[Any], int],
    score_of: Callable[[Any], float],
    iou_fn: Callable[[Any, Any], float],
    iou_thresh: float,
    pair_ok: Callable[[Any, Any], bool] | None = None,
) -> float:
    # Mean AP over the classes present in ground truth; predictions for
    # absent classes are dropped.
    gt_classes: dict[int, dict[Hashable, list[Any]]] = {}
    for group, items in gts.items():
        for gt in items:
            gt_classes.setdefault(class_of(gt), {}).setdefault(group, []).append(gt)
    if not gt_classes:
        raise ValueError("AP is undefined with no ground-truth instances")
    pred_classes: dict[int, list[tuple[float, int, Hashable, Any]]] = {}
    order = 0
    for group, items in preds.items():
        for pred in items:
            cls = class_of(pred)
            if cls in gt_classes:
                pred_classes.setdefault(cls, []).append((score_of(pred), order, group, pred))
            order += 1
    total = 0.0
    for cls in sorted(gt_classes):
        total += _greedy_class_ap(
            pred_classes.get(cls, ()), gt_classes[cls], iou_fn, iou_thresh, pair_ok
        )
    return total / len(gt_classes)


def average_map(
    preds: Mapping[Hashable, Sequence[RankedSegment]],
    gts: Mapping[Hashable, Sequence[MomentInstance]],
    tiou_thresholds: Sequence[float] = DEFAULT_MAP_TIOUS,
) -> MetricReport:
    """Mean AP over classes, averaged over a grid of tIoU thresholds.

    Both maps are keyed by video id. Prediction labels are class ids;
    classes never seen in ground truth are excluded from the mean, classes
    with ground truth but no predictions contribute zero.
    """
    thresholds = [float(t) for t in tiou_thresholds]
    _require(len(thresholds) >= 1, "need at least one tIoU threshold")
    _require(all(0 < t <= 1 for t in thresholds), "tIoU thresholds must be in (0, 1]")
    for group, items in preds.items():
        for p in items:
            _require(isinstance(p.label, int), f"prediction in group {group!r} has a non-integer class label")
    breakdown: dict[str, float] = {}
    for t in thresholds:
        breakdown[f"mAP@{t:.2f}"] = _detection_map(
            preds,
            gts,
            class_of=lambda x: x.label if isinstance(x, RankedSegment) else x.class_id,
            score_of=lambda x: x.score,
            iou_fn=lambda p, g: temporal_iou(p.segment, g.segment),
            iou_thresh=t,
        )
    value = sum(breakdown.values()) / len(thresholds)
    count = sum(len(v) for v in gts.values())
    return MetricReport(name="mAP", value=value, breakdown=breakdown, count=count, family="percent")


@dataclass(frozen=True)
class HandDisplacement:
    """Per-instance displacement of one hand, in pixels."""

    mean_px: float | None
    contact_px: float | None


def _distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def hand_displacement(pred: HandKeyframes, gt: HandKeyframes) -> dict[str, HandDisplacement]:
    """Mean and contact-frame distances between predicted and true positions.

    Only keyframes where ground truth marks the hand visible enter the
    average; a hand never visible yields None for both numbers.
    """
    out: dict[str, HandDisplacement] = {}
    for hand in ("left", "right"):
        dists = [
            _distance(pred[tag].coords(hand), gt[tag].coords(hand))
            for tag in gt.points
            if gt[tag].visible(hand)
        ]
        mean_px = sum(dists) / len(dists) if dists else None
        contact_px = (
            _distance(pred["c"].coords(hand), gt["c"].coords(hand))
            if gt["c"].visible(hand)
            else None
        )
        out[hand] = HandDisplacement(mean_px=mean_px, contact_px=contact_px)
    return out


def displacement_report(
    preds: Mapping[str, HandKeyframes],
    gts: Mapping[str, HandKeyframes],
) -> list[MetricReport]:
    """Dataset-level displacement, averaged per instance then over instances.

    Returns up to four reports (left/right, mean/contact); a hand with no
    visible ground truth anywhere is omitted rather than reported as zero.
    """
    if not gts:
        raise ValueError("displacement is undefined with no ground-truth instances")
    missing = [key for key in gts if key not in preds]
    if missing:
        raise DataError(f"predictions missing for instances: {missing[:5]}")
    per_instance = ordered_map(lambda key: hand_displacement(preds[key], gts[key]), list(gts))
    reports: list[MetricReport] = []
    for hand, tag in (("left", "L"), ("right", "R")):
        for attr, kind in (("mean_px", "M"), ("contact_px", "C")):
            vals = [getattr(d[hand], attr) for d in per_instance if getattr(d[hand], attr) is not None]
            if not vals:
                continue
            reports.append(
                MetricReport(
                    name=f"{tag}-{kind}.Disp",
                    value=sum(vals) / len(vals),
                    count=len(vals),
                    family="pixels",
                )
            )
    return reports


def levenshtein(a: Sequence[Hashable], b: Sequence[Hashable]) -> int:
    """Unit-cost edit distance between two sequences."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, y in enumerate(b, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y))
        prev = cur
    return prev[len(b)]


def _project(seq: Sequence[ActionLabel], mode: str) -> tuple[Hashable, ...]:
    if mode == "verb":
        return tuple(a.verb_id for a in seq)
    if mode == "noun":
        return tuple(a.noun_id for a in seq)
    return tuple((a.verb_id, a.noun_id) for a in seq)


def edit_distance_at_z(
    forecasts: Mapping[Hashable, LtaForecast],
    gts: Mapping[Hashable, Sequence[ActionLabel]],
    mode: str = "action",
) -> float:
    """Mean over instances of the best candidate's normalized edit distance.

    Each forecast offers up to K candidate sequences; the minimum edit
    distance to the true sequence, divided by its length Z, scores the
    instance. Modes project sequences to verbs, nouns, or full pairs.
    """
    _require(mode in ED_MODES, f"mode must be one of {ED_MODES}")
    if not gts:
        raise ValueError("edit distance is undefined with no ground-truth instances")
    missing = [key for key in gts if key not in forecasts]
    if missing:
        raise DataError(f"forecasts missing for instances: {missing[:5]}")
    extra = [key for key in forecasts if key not in gts]
    if extra:
        raise DataError(f"forecasts for unknown instances: {extra[:5]}")

    def score_one(key: Hashable) -> float:
        truth = list(gts[key])
        z = len(truth)
        _require(z >= 1, f"instance {key!r} has an empty ground-truth sequence")
        forecast = forecasts[key]
        if forecast.z != z:
            raise DataError(f"instance {key!r}: candidate length {forecast.z} != {z}")
        target = _project(truth, mode)
        best = min(levenshtein(_project(c, mode), target) for c in forecast.candidates)
        return best / z

    values = ordered_map(score_one, list(gts))
    return sum(values) / len(values)


def edit_distance_report(
    forecasts: Mapping[Hashable, LtaForecast],
    gts: Mapping[Hashable, Sequence[ActionLabel]],
) -> list[MetricReport]:
    """Verb, noun, and action edit distance over one forecast set."""
    return [
        MetricReport(
            name=mode.capitalize(),
            value=edit_distance_at_z(forecasts, gts, mode),
            count=len(gts),
            family="edit",
        )
        for mode in ED_MODES
    ]


def _sta_pair_ok(criteria: str, ttc_tol_s: float) -> Callable[[StaInstance, StaInstance], bool]:
    need_verb = criteria in ("noun_verb", "overall")
    need_ttc = criteria in ("noun_ttc", "overall")

    def ok(pred: StaInstance, gt: StaInstance) -> bool:
        if need_verb and pred.verb_id != gt.verb_id:
            return False
        if need_ttc and abs(pred.ttc_s - gt.ttc_s) > ttc_tol_s:
            return False
        return True

    return ok


def sta_ap(
    preds: Mapping[str, Sequence[StaInstance]],
    gts: Mapping[str, Sequence[StaInstance]],
    criteria: str = "noun",
    box_iou_thresh: float = 0.5,
    ttc_tol_s: float = 0.25,
    top_k: int = 5,
) -> float:
    """Mean AP over noun classes for short-term interaction anticipation.

    Only the top_k highest-scored predictions per keyframe compete. A match
    needs box IoU at the threshold, an equal noun (implicit in the per-class
    grouping), and, depending on criteria, an equal verb and/or a time to
    contact within the tolerance.
    """
    _require(criteria in STA_CRITERIA, f"criteria must be one of {STA_CRITERIA}")
    _require(0 < box_iou_thresh <= 1, "box_iou_thresh must be in (0, 1]")
    _require(ttc_tol_s > 0, "ttc_tol_s must be positive")
    _require(isinstance(top_k, int) and top_k >= 1, "top_k must be an int >= 1")
    kept: dict[str, list[StaInstance]] = {}
    for frame, items in preds.items():
        order = _ranked(list(items), lambda p: p.score)[:top_k]
        kept[frame] = [items[i] for i in order]
    return _detection_map(
        kept,
        gts,
        class_of=lambda x: x.noun_id,
        score_of=lambda x: x.score,
        iou_fn=lambda p, g: box_iou(p.box, g.box),
        iou_thresh=box_iou_thresh,
        pair_ok=_sta_pair_ok(criteria, ttc_tol_s),
    )


STA_REPORT_NAMES = (
    ("noun", "Noun"),
    ("noun_verb", "Noun+Verb"),
    ("noun_ttc", "Noun+TTC"),
    ("overall", "Overall"),
)


def sta_report(
    preds: Mapping[str, Sequence[StaInstance]],
    gts: Mapping[str, Sequence[StaInstance]],
    box_iou_thresh: float = 0.5,
    ttc_tol_s: float = 0.25,
    top_k: int = 5,
) -> list[MetricReport]:
    """The four anticipation AP variants on one prediction set."""
    count = sum(len(v) for v in gts.values())
    return [
        MetricReport(
            name=name,
            value=sta_ap(preds, gts, criteria, box_iou_thresh, ttc_tol_s, top_k),
            count=count,
            family="percent",
        )
        for criteria, name in STA_REPORT_NAMES
    ]


def box_ap(
    preds: Mapping[str, Sequence[Detection]],
    gts: Mapping[str, Sequence[Detection]],
    iou_thresholds: Sequence[float] = BOX_AP_IOUS,
) -> MetricReport:
    """Detection AP averaged over classes and an IoU threshold grid.

    The default grid is 0.50 to 0.95 in steps of 0.05; the breakdown keeps
    every per-threshold value (AP50 and AP75 are the usual single-threshold
    cuts when present in the grid).
    """
    thresholds = [float(t) for t in iou_thresholds]
    _require(len(thresholds) >= 1, "need at least one IoU threshold")
    _require(all(0 < t <= 1 for t in thresholds), "IoU thresholds must be in (0, 1]")
    breakdown: dict[str, float] = {}
    for t in thresholds:
        breakdown[f"AP@{t:.2f}"] = _detection_map(
            preds,
            gts,
            class_of=lambda x: x.class_id,
            score_of=lambda x: x.score,
            iou_fn=lambda p, g: box_iou(p.box, g.box),
            iou_thresh=t,
        )
    value = sum(breakdown.values()) / len(thresholds)
    for cut, label in ((0.50, "AP50"), (0.75, "AP75")):
        key = f"AP@{cut:.2f}"
        if key in breakdown:
            breakdown[label] = breakdown[key]
    count = sum(len(v) for v in gts.values())
    return MetricReport(name="AP", value=value, breakdown=breakdown, count=count, family="percent")
