"""Combining predictions: across clips, views, models, and score ranks.

Cheap, deterministic ensembling is the workhorse here: averaging class
probabilities over clips, averaging coordinates over augmented views, and
deduplicating boxes or segments that several models agree on. Averages are
taken in a canonical operand order, so every operation is exactly invariant
to permutations of its inputs.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    ActionLabel,
    BoundingBox,
    RankedSegment,
    ScoreMatrix,
    StaInstance,
    _require,
)
from .metrics import box_iou, temporal_iou

VOTE_RULES = ("mean_prob", "majority")


@dataclass(frozen=True)
class VoteConfig:
    """How per-clip probabilities are combined into one decision."""

    combine_rule: str = "mean_prob"
    tie_break: str = "lowest_index"
    clip_weighting: str = "uniform"

    def __post_init__(self) -> None:
        _require(self.combine_rule in VOTE_RULES, f"combine_rule must be one of {VOTE_RULES}")
        _require(self.tie_break == "lowest_index", "only lowest_index tie breaking is supported")
        _require(self.clip_weighting == "uniform", "only uniform clip weighting is supported")


@dataclass(frozen=True)
class FusionConfig:
    """Thresholds for result-level fusion across models."""

    box_nms_iou: float = 0.75
    temporal_nms_tiou: float = 0.5
    top_k: int = 5

    def __post_init__(self) -> None:
        _require(0 < self.box_nms_iou <= 1, "box_nms_iou must be in (0, 1]")
        _require(0 < self.temporal_nms_tiou <= 1, "temporal_nms_tiou must be in (0, 1]")
        _require(isinstance(self.top_k, int) and self.top_k >= 1, "top_k must be an int >= 1")


def _canonical_mean(arrays: Sequence[np.ndarray]) -> np.ndarray:
    # Sum in byte-order of the operands: permutation invariance becomes
    # exact instead of up-to-rounding.
    ordered = sorted(arrays, key=lambda a: a.tobytes())
    if ordered[0].tobytes() == ordered[-1].tobytes():
        # All operands identical; skip the sum so the mean of n copies is
        # the copy itself for every n, not only powers of two.
        return np.array(ordered[0], dtype=np.float64)
    total = np.zeros_like(ordered[0], dtype=np.float64)
    for a in ordered:
        total += a
    return total / len(ordered)


def _argmax_row(row: np.ndarray) -> int:
    # First maximum, so equal probabilities resolve to the lowest index.
    return int(np.argmax(row))


def multi_clips_vote(
    clip_probs: Sequence[ScoreMatrix],
    config: VoteConfig = VoteConfig(),
) -> tuple[tuple[ActionLabel, ...], ScoreMatrix]:
    """Combine per-clip probability matrices into one label sequence.

    mean_prob averages the probability rows and takes the per-position
    argmax. majority lets each clip vote with its own argmax and takes the
    plurality, breaking ties by the higher mean probability and then the
    lower class index. The averaged matrix is returned either way, for
    downstream candidate expansion.
    """
    clips = list(clip_probs)
    _require(len(clips) >= 1, "need at least one clip to vote")
    z = clips[0].z
    for m in clips:
        _require(m.verb.shape == clips[0].verb.shape, "verb matrices must share a shape")
        _require(m.noun.shape == clips[0].noun.shape, "noun matrices must share a shape")
    fused = ScoreMatrix(
        verb=_canonical_mean([m.verb for m in clips]),
        noun=_canonical_mean([m.noun for m in clips]),
    )
    labels: list[ActionLabel] = []
    for pos in range(z):
        if config.combine_rule == "mean_prob":
            verb = _argmax_row(fused.verb[pos])
            noun = _argmax_row(fused.noun[pos])
        else:
            verb = _plurality([_argmax_row(m.verb[pos]) for m in clips], fused.verb[pos])
            noun = _plurality([_argmax_row(m.noun[pos]) for m in clips], fused.noun[pos])
        labels.append(ActionLabel(verb_id=verb, noun_id=noun))
    return tuple(labels), fused


def _plurality(votes: Sequence[int], mean_row: np.ndarray) -> int:
    counts = np.bincount(votes, minlength=mean_row.shape[0])
    # Most votes, then highest mean probability, then lowest index.
    best = min(range(mean_row.shape[0]), key=lambda c: (-counts[c], -mean_row[c], c))
    return int(best)


def multi_view_average(view_preds: Sequence[np.ndarray]) -> np.ndarray:
    """Average coordinate vectors predicted from several augmented views."""
    views = [np.asarray(v, dtype=np.float64) for v in view_preds]
    _require(len(views) >= 1, "need at least one view")
    for v in views:
        _require(v.ndim == 1 and v.shape == views[0].shape, "views must be 1-D vectors of one shape")
        _require(bool(np.isfinite(v).all()), "views must be finite")
    return _canonical_mean(views)


def nms(
    boxes: Sequence[BoundingBox],
    scores: Sequence[float],
    iou_thresh: float,
) -> list[int]:
    """Greedy non-maximum suppression; returns kept indices by falling score.

    The highest score wins each round (ties keep the earlier index) and
    suppresses every remaining box strictly above the IoU threshold.
    """
    _require(len(boxes) == len(scores), "boxes and scores must align")
    _require(0 < iou_thresh <= 1, f"iou_thresh must be in (0, 1], got {iou_thresh}")
    svals = [float(s) for s in scores]
    _require(all(np.isfinite(svals)), "scores must be finite")
    n = len(boxes)
    if n == 0:
        return []
    x1 = np.array([b.x1 for b in boxes])
    y1 = np.array([b.y1 for b in boxes])
    x2 = np.array([b.x2 for b in boxes])
    y2 = np.array([b.y2 for b in boxes])
    areas = (x2 - x1) * (y2 - y1)
    order = sorted(range(n), key=lambda i: (-svals[i], i))
    suppressed = np.zeros(n, dtype=bool)
    kept: list[int] = []
    for i in order:
        if suppressed[i]:
            continue
        kept.append(i)
        iw = np.maximum(0.0, np.minimum(x2[i], x2) - np.maximum(x1[i], x1))
        ih = np.maximum(0.0, np.minimum(y2[i], y2) - np.maximum(y1[i], y1))
        inter = iw * ih
        union = areas[i] + areas - inter
        iou = np.divide(inter, union, out=np.zeros(n), where=union > 0)
        suppressed |= iou > iou_thresh
    return kept


def temporal_nms(
    segments: Sequence[RankedSegment],
    tiou_thresh: float,
) -> list[int]:
    """Greedy suppression over scored segments by temporal IoU."""
    _require(0 < tiou_thresh <= 1, f"tiou_thresh must be in (0, 1], got {tiou_thresh}")
    n = len(segments)
    order = sorted(range(n), key=lambda i: (-segments[i].score, i))
    suppressed = [False] * n
    kept: list[int] = []
    for i in order:
        if suppressed[i]:
            continue
        kept.append(i)
        for j in order:
            if not suppressed[j] and j != i:
                if temporal_iou(segments[i].segment, segments[j].segment) > tiou_thresh:
                    suppressed[j] = True
        suppressed[i] = True
    return kept


def topk_by_noun_score(instances: Sequence[StaInstance], k: int) -> list[StaInstance]:
    """Keep the k best-scored anticipation boxes of one keyframe."""
    _require(isinstance(k, int) and k >= 1, "k must be an int >= 1")
    order = sorted(range(len(instances)), key=lambda i: (-instances[i].score, i))
    return [instances[i] for i in order[:k]]


def splice_and_nms(
    model_results: Sequence[Sequence[StaInstance]],
    iou_thresh: float = 0.75,
) -> list[StaInstance]:
    """Merge per-model box lists for one keyframe and deduplicate.

    Suppression is label-agnostic: two models predicting the same region
    with different nouns still collapse to the higher-scored box. Ties go to
    the earlier model. The threshold is deliberately higher than a plain
    detector's, so only near-identical boxes merge.
    """
    pool: list[StaInstance] = [inst for result in model_results for inst in result]
    kept = nms([p.box for p in pool], [p.score for p in pool], iou_thresh)
    return [pool[i] for i in kept]


def post_fuse_segments(
    ranked_lists: Sequence[Sequence[RankedSegment]],
    tiou_thresh: float = 0.5,
) -> list[RankedSegment]:
    """Merge ranked segment lists from several models for one label group.

    Lists are spliced in order (earlier lists win score ties) and greedily
    deduplicated by temporal IoU; survivors come back highest score first.
    """
    pool: list[RankedSegment] = [seg for ranked in ranked_lists for seg in ranked]
    kept = temporal_nms(pool, tiou_thresh)
    return [pool[i] for i in kept]


def box_positional_encoding(
    box: BoundingBox,
    image_w: float,
    image_h: float,
    dim: int,
) -> np.ndarray:
    """Sinusoidal code of a box's normalized corner coordinates.

    Each of the four coordinates is normalized by the image size and
    expanded into dim/8 (sin, cos) pairs at geometrically spaced
    frequencies, laid out coordinate-major. The code lives in [-1, 1] and
    is added to region features, so its width must match theirs.
    """
    _require(image_w > 0 and image_h > 0, "image size must be positive")
    _require(isinstance(dim, int) and dim >= 8 and dim % 8 == 0, "dim must be a positive multiple of 8")
    coords = np.array(
        [box.x1 / image_w, box.y1 / image_h, box.x2 / image_w, box.y2 / image_h]
    )
    pairs = dim // 8
    # Frequency ladder matching the usual transformer position code: pair j
    # divides by 10000^(2j / (dim/4)).
    scales = np.power(10000.0, 2.0 * np.arange(pairs) / (dim // 4))
    out = np.empty(dim, dtype=np.float64)
    for c, value in enumerate(coords):
        angles = value / scales
        block = out[c * 2 * pairs : (c + 1) * 2 * pairs]
        block[0::2] = np.sin(angles)
        block[1::2] = np.cos(angles)
    return out


def top_k_sequences(matrix: ScoreMatrix, k: int) -> tuple[tuple[ActionLabel, ...], ...]:
    """Most probable label sequences under a per-position probability matrix.

    Positions are treated as independent and verb/noun as a product, so a
    sequence's probability is the product of its per-position verb and noun
    probabilities. Sequences come back in falling probability; ties resolve
    to lower class indices earlier. The first sequence is always the
    per-position argmax.
    """
    _require(isinstance(k, int) and k >= 1, "k must be an int >= 1")
    z = matrix.z
    c_n = matrix.noun.shape[1]
    with np.errstate(divide="ignore"):
        log_v = np.log(matrix.verb)
        log_n = np.log(matrix.noun)
    ranked_logp: list[np.ndarray] = []
    ranked_pair: list[list[tuple[int, int]]] = []
    for pos in range(z):
        joint = (log_v[pos][:, None] + log_n[pos][None, :]).reshape(-1)
        order = sorted(range(joint.size), key=lambda i: (-joint[i], i))
        ranked_logp.append(joint[order])
        ranked_pair.append([(i // c_n, i % c_n) for i in order])
    width = ranked_logp[0].size

    def total(ranks: tuple[int, ...]) -> float:
        return float(sum(ranked_logp[pos][r] for pos, r in enumerate(ranks)))

    def to_sequence(ranks: tuple[int, ...]) -> tuple[ActionLabel, ...]:
        return tuple(
            ActionLabel(verb_id=ranked_pair[pos][r][0], noun_id=ranked_pair[pos][r][1])
            for pos, r in enumerate(ranks)
        )

    start = (0,) * z
    heap: list[tuple[float, tuple[int, ...]]] = [(-total(start), start)]
    seen = {start}
    out: list[tuple[ActionLabel, ...]] = []
    while heap and len(out) < k:
        _, ranks = heapq.heappop(heap)
        out.append(to_sequence(ranks))
        for pos in range(z):
            if ranks[pos] + 1 < width:
                nxt = ranks[:pos] + (ranks[pos] + 1,) + ranks[pos + 1 :]
                if nxt not in seen:
                    seen.add(nxt)
                    heapq.heappush(heap, (-total(nxt), nxt))
    return tuple(out)
