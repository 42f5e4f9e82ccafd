"""End-to-end runs on synthetic data: train a toy head, fuse, evaluate.

The central experiment checks a directional claim: forecasting from a wider
observable window, with per-clip probabilities averaged by voting, should
beat a single short clip, and widening the window should not hurt. Nothing
here is neural; the point is pipeline plumbing with real gradients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .fusion import VoteConfig, multi_clips_vote, top_k_sequences
from .heads import LinearHead, SgdConfig, classifier_probs, head_forward, joint_targets, new_head, train_head
from .metrics import ED_MODES, edit_distance_at_z
from .model import FeatureMatrix, HandKeyframes, LtaForecast, ScoreMatrix, TemporalSegment, _require
from .snippets import frame_span, observable_window, prefuse_features, sliding_clips
from .synth import SynthDataset, fhp_target_vector, stub_features, vector_to_keyframes

DEFAULT_ALPHAS = (2.0, 4.0, 8.0, 16.0)
DEFAULT_CLIP_LEN_S = 2.0
DEFAULT_CLIP_STRIDE_S = 2.0


def fused_clip_feature(ds: SynthDataset, video_id: str, clip: TemporalSegment) -> np.ndarray:
    """Verb and noun stub features for one clip, channel-concatenated."""
    span = frame_span(clip.start_s, clip.end_s, ds.config.fps)
    dim = ds.config.feature_dim
    verb = FeatureMatrix(
        dim=dim, rows=stub_features(video_id, span, dim, "verb", ds.latent)[None, :], provenance="verb"
    )
    noun = FeatureMatrix(
        dim=dim, rows=stub_features(video_id, span, dim, "noun", ds.latent)[None, :], provenance="noun"
    )
    return prefuse_features(verb, noun).rows[0].astype(np.float64)


def _episode_window(ds: SynthDataset, video_id: str, alpha_s: float):
    vid, anchor = ds.episode(video_id)
    return anchor, observable_window(ds.clip_ends[vid], anchor, alpha_s)


def forecast_training_set(
    ds: SynthDataset,
    video_ids: Sequence[str],
    alpha_s: float = 16.0,
    clip_len_s: float = DEFAULT_CLIP_LEN_S,
    clip_stride_s: float = DEFAULT_CLIP_STRIDE_S,
) -> tuple[np.ndarray, np.ndarray]:
    """One training example per sliding clip in each episode's window."""
    rows: list[np.ndarray] = []
    seqs = []
    for vid in video_ids:
        anchor, window = _episode_window(ds, vid, alpha_s)
        truth = ds.lta_gt[(vid, anchor)]
        for clip in sliding_clips(window, clip_len_s, clip_stride_s):
            rows.append(fused_clip_feature(ds, vid, clip))
            seqs.append(truth)
    _require(len(rows) >= 1, "no training examples; check the video id list")
    return np.stack(rows), joint_targets(seqs, ds.config.c_n)


def train_forecaster(
    ds: SynthDataset,
    video_ids: Sequence[str],
    epochs: int = 80,
    lr: float = 2.0,
    momentum: float = 0.9,
    seed: int = 0,
    alpha_s: float = 16.0,
    clip_len_s: float = DEFAULT_CLIP_LEN_S,
    clip_stride_s: float = DEFAULT_CLIP_STRIDE_S,
) -> tuple[LinearHead, list[float]]:
    """Fit the per-position (verb, noun) classifier on stub features."""
    inputs, targets = forecast_training_set(ds, video_ids, alpha_s, clip_len_s, clip_stride_s)
    cfg = ds.config
    head = new_head(
        "classifier_C", in_dim=2 * cfg.feature_dim, seed=seed, z=cfg.z, c_v=cfg.c_v, c_n=cfg.c_n
    )
    return train_head(head, inputs, targets, SgdConfig(lr=lr, momentum=momentum), epochs=epochs, seed=seed)


def _clip_probs(ds: SynthDataset, head: LinearHead, video_id: str, clips: Sequence[TemporalSegment]) -> list[ScoreMatrix]:
    return [classifier_probs(head, fused_clip_feature(ds, video_id, c)) for c in clips]


def voted_forecast(
    ds: SynthDataset,
    head: LinearHead,
    video_id: str,
    alpha_s: float,
    clip_len_s: float = DEFAULT_CLIP_LEN_S,
    clip_stride_s: float = DEFAULT_CLIP_STRIDE_S,
    k: int | None = None,
    vote: VoteConfig = VoteConfig(),
) -> LtaForecast:
    """Forecast from every clip in the window, fused by voting."""
    anchor, window = _episode_window(ds, video_id, alpha_s)
    clips = sliding_clips(window, clip_len_s, clip_stride_s)
    _, fused = multi_clips_vote(_clip_probs(ds, head, video_id, clips), vote)
    candidates = top_k_sequences(fused, k if k is not None else ds.config.k)
    return LtaForecast(clip_index=anchor, candidates=candidates, score_matrix=fused)


def center_clip_forecast(
    ds: SynthDataset,
    head: LinearHead,
    video_id: str,
    alpha_s: float,
    clip_len_s: float = DEFAULT_CLIP_LEN_S,
    k: int | None = None,
) -> LtaForecast:
    """Forecast from the single clip centered in the window."""
    anchor, window = _episode_window(ds, video_id, alpha_s)
    mid = (window.start_s + window.end_s) / 2.0
    clip = TemporalSegment(start_s=mid - clip_len_s / 2.0, end_s=mid + clip_len_s / 2.0)
    probs = classifier_probs(head, fused_clip_feature(ds, video_id, clip))
    candidates = top_k_sequences(probs, k if k is not None else ds.config.k)
    return LtaForecast(clip_index=anchor, candidates=candidates, score_matrix=probs)


@dataclass(frozen=True)
class TrendResult:
    """Edit distances per window size, voted and center-clip baselines."""

    alphas: tuple[float, ...]
    voted: Mapping[float, Mapping[str, float]]
    center: Mapping[float, Mapping[str, float]]


def window_trend(
    ds: SynthDataset,
    head: LinearHead,
    video_ids: Sequence[str],
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    clip_len_s: float = DEFAULT_CLIP_LEN_S,
    clip_stride_s: float = DEFAULT_CLIP_STRIDE_S,
    k: int | None = None,
) -> TrendResult:
    """Evaluate edit distance as the observable window widens."""
    _require(len(video_ids) >= 1, "need at least one evaluation video")
    voted: dict[float, dict[str, float]] = {}
    center: dict[float, dict[str, float]] = {}
    gts = {ds.episode(vid): ds.lta_gt[ds.episode(vid)] for vid in video_ids}
    for alpha in alphas:
        vf = {ds.episode(vid): voted_forecast(ds, head, vid, alpha, clip_len_s, clip_stride_s, k) for vid in video_ids}
        cf = {ds.episode(vid): center_clip_forecast(ds, head, vid, alpha, clip_len_s, k) for vid in video_ids}
        voted[float(alpha)] = {m: edit_distance_at_z(vf, gts, m) for m in ED_MODES}
        center[float(alpha)] = {m: edit_distance_at_z(cf, gts, m) for m in ED_MODES}
    return TrendResult(alphas=tuple(float(a) for a in alphas), voted=voted, center=center)


# ---------------------------------------------------------------------------
# Hand-position regression on the same stub features.
# ---------------------------------------------------------------------------


def hand_feature(ds: SynthDataset, video_id: str) -> np.ndarray:
    """Whole-video fused stub feature used by the hand regressor."""
    meta = next(v for v in ds.videos if v.video_id == video_id)
    clip = TemporalSegment(start_s=0.0, end_s=meta.num_frames / meta.fps)
    return fused_clip_feature(ds, video_id, clip)


def hand_training_set(ds: SynthDataset, video_ids: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """Features and normalized 20-coordinate targets per video."""
    rows = [hand_feature(ds, vid) for vid in video_ids]
    targets = [fhp_target_vector(ds.fhp_gt[vid], ds.config.resolution) for vid in video_ids]
    _require(len(rows) >= 1, "no training examples; check the video id list")
    return np.stack(rows), np.stack(targets)


def train_hand_regressor(
    ds: SynthDataset,
    video_ids: Sequence[str],
    epochs: int = 200,
    lr: float = 0.05,
    momentum: float = 0.9,
    seed: int = 0,
) -> tuple[LinearHead, list[float]]:
    """Fit the 20-way coordinate regressor with L1 loss."""
    inputs, targets = hand_training_set(ds, video_ids)
    head = new_head("regression_20", in_dim=2 * ds.config.feature_dim, seed=seed)
    return train_head(head, inputs, targets, SgdConfig(lr=lr, momentum=momentum), epochs=epochs, seed=seed)


def predict_keyframes(ds: SynthDataset, head: LinearHead, video_id: str) -> HandKeyframes:
    """Run the hand regressor and unpack its output to keyframes."""
    vec = head_forward(head, hand_feature(ds, video_id))
    return vector_to_keyframes(vec, ds.config.resolution)
