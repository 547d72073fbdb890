"""Online open-vocabulary 3D multi-object tracking.

Detections arrive frame by frame as oriented 3D boxes with free-form class
labels. Each frame the tracker serializes (track history, candidate) pairs
into box-slot prompts, scores them with a pluggable scorer, solves a gated
assignment, and updates track lifecycles. Evaluation, training-pair mining,
and a synthetic scene generator round out the toolkit.
"""

from .assignment import (FORBIDDEN, Assignment, CandidateSet, CostMatrix, build_cost,
                         gate, solve, solve_brute, threshold_filter, total_cost)
from .errors import (EmptyGroundTruth, EmptyHistory, InsufficientHistory,
                     MalformedResponse, MissingScore, NonMonotonicFrame, OvmotError,
                     ParseError, SchemaVersionMismatch, ScorerUnavailable,
                     SizeExceeded)
from .geometry import (Box3D, JitterParams, backend_name, boxes_to_array,
                       center_distance_bev, iou_3d, iou_3d_matrix, iou_bev, jitter,
                       normalize_yaw, volume, yaw_difference)
from .lifecycle import (FrameResult, LifecycleConfig, Track, TrackOutput, TrackState,
                        Tracker, load_tracking_jsonl, scene_stream,
                        write_tracking_jsonl)
from .metrics import (AmotaResult, ClearResult, EvalBox, EvalConfig, RecallPoint,
                      SplitMetrics, amota, clear_mot, match_frame, render_report,
                      report_to_json, split_eval)
from .mining import (GroundTruthTrack, MiningConfig, ThresholdSelection, TrainingPair,
                     emit_dataset, gt_tracks_from_scene, load_dataset,
                     mine_hard_negatives, mine_positive, mine_scene, select_threshold)
from .scene import (Detection, GtBox, SceneFile, SceneFrame, load_scene,
                    scene_to_json, write_scene)
from .scoring import (MAX_BATCH_PAIRS, AssociationScore, GeometricScorer,
                      GeoScorerParams, RemoteScorer, Scorer, ScoreRequest,
                      geometric_score, predict_next)
from .serializer import (DEFAULT_TEMPLATE_ID, BoxSlot, ClassVocabulary,
                         GeometryFeature, PromptSequence, SerializerConfig,
                         TextSegment, geometry_features, prompt_from_json,
                         prompt_to_json, render_class, serialize_pair)
from .simulate import SimConfig, default_vocabulary, simulate

__version__ = "0.1.0"

__all__ = [
    "Assignment", "AssociationScore", "AmotaResult", "Box3D", "BoxSlot",
    "CandidateSet", "ClassVocabulary", "ClearResult", "CostMatrix",
    "DEFAULT_TEMPLATE_ID", "Detection", "EmptyGroundTruth", "EmptyHistory",
    "EvalBox", "EvalConfig", "FORBIDDEN", "FrameResult", "GeoScorerParams",
    "GeometricScorer", "GeometryFeature", "GroundTruthTrack", "GtBox",
    "InsufficientHistory", "JitterParams", "LifecycleConfig", "MAX_BATCH_PAIRS",
    "MalformedResponse", "MiningConfig", "MissingScore", "NonMonotonicFrame",
    "OvmotError", "ParseError", "PromptSequence", "RecallPoint", "RemoteScorer",
    "SceneFile", "SceneFrame", "SchemaVersionMismatch", "ScoreRequest", "Scorer",
    "ScorerUnavailable", "SerializerConfig", "SimConfig", "SizeExceeded",
    "SplitMetrics", "TextSegment", "ThresholdSelection", "Track", "TrackOutput",
    "TrackState", "Tracker", "TrainingPair", "amota", "backend_name",
    "boxes_to_array", "build_cost", "center_distance_bev", "clear_mot",
    "default_vocabulary", "emit_dataset", "gate", "geometric_score",
    "geometry_features", "gt_tracks_from_scene", "iou_3d", "iou_3d_matrix",
    "iou_bev", "jitter", "load_dataset", "load_scene", "load_tracking_jsonl",
    "match_frame", "mine_hard_negatives", "mine_positive", "mine_scene",
    "normalize_yaw", "predict_next", "prompt_from_json", "prompt_to_json",
    "render_class", "render_report", "report_to_json", "scene_stream",
    "scene_to_json", "select_threshold", "serialize_pair", "simulate", "solve",
    "solve_brute", "split_eval", "threshold_filter", "total_cost", "volume",
    "write_scene", "write_tracking_jsonl", "yaw_difference",
]
