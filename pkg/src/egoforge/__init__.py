"""Scheduling, fusion, and evaluation tools for egocentric video tasks."""

from .errors import DataError, SchemaError, TrainingDiverged
from .fusion import FusionConfig, VoteConfig, multi_clips_vote, nms, top_k_sequences
from .heads import LinearHead, SgdConfig, new_head, train_head
from .metrics import (
    MetricReport,
    average_map,
    box_ap,
    box_iou,
    displacement_report,
    edit_distance_at_z,
    edit_distance_report,
    recall_at_k,
    recall_at_kx,
    sta_ap,
    sta_report,
    temporal_iou,
)
from .model import (
    ActionLabel,
    BoundingBox,
    Detection,
    FeatureMatrix,
    HandKeyframes,
    HandPoint,
    LtaForecast,
    MomentInstance,
    NlqInstance,
    RankedSegment,
    ScoreMatrix,
    StaInstance,
    TemporalSegment,
    VideoMeta,
)
from .snippets import (
    ObservableWindow,
    SnippetSchedule,
    build_snippet_schedule,
    observable_window,
    prefuse_features,
    sample_frames,
    sliding_clips,
)
from .synth import SynthConfig, generate_synthetic, perfect_predictions

__version__ = "0.1.0"

__all__ = [
    "ActionLabel",
    "BoundingBox",
    "DataError",
    "Detection",
    "FeatureMatrix",
    "FusionConfig",
    "HandKeyframes",
    "HandPoint",
    "LinearHead",
    "LtaForecast",
    "MetricReport",
    "MomentInstance",
    "NlqInstance",
    "ObservableWindow",
    "RankedSegment",
    "SchemaError",
    "ScoreMatrix",
    "SgdConfig",
    "SnippetSchedule",
    "StaInstance",
    "SynthConfig",
    "TemporalSegment",
    "TrainingDiverged",
    "VideoMeta",
    "VoteConfig",
    "average_map",
    "box_ap",
    "box_iou",
    "build_snippet_schedule",
    "displacement_report",
    "edit_distance_at_z",
    "edit_distance_report",
    "generate_synthetic",
    "multi_clips_vote",
    "new_head",
    "nms",
    "observable_window",
    "perfect_predictions",
    "prefuse_features",
    "recall_at_k",
    "recall_at_kx",
    "sample_frames",
    "sliding_clips",
    "sta_ap",
    "sta_report",
    "temporal_iou",
    "top_k_sequences",
    "train_head",
]
