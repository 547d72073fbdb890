"""Training-pair construction for the pairwise association scorer.

Positives pair a track's true history with a jittered copy of its next box;
negatives pair the same history with a different object's box. The default
strategy takes the spatially nearest wrong-identity boxes (the confusable
ones); uniform-within-radius and uniform-anywhere strategies exist so the
sampling choice itself can be compared. A small calibration helper picks the
accept/reject probability threshold that best separates a labeled pair set.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InsufficientHistory
from .geometry import Box3D, JitterParams, center_distance_bev, iou_3d, jitter
from .scene import SceneFile
from .scoring import ScoreRequest, Scorer
from .serializer import (ClassVocabulary, PromptSequence, SerializerConfig,
                         prompt_from_json, prompt_to_json, serialize_pair)

STRATEGY_HARD = "hard"
STRATEGY_LOCAL = "local"
STRATEGY_RANDOM = "random"
_STRATEGIES = (STRATEGY_HARD, STRATEGY_LOCAL, STRATEGY_RANDOM)


@dataclass(frozen=True, slots=True)
class GroundTruthTrack:
    """One object's true trajectory: frame -> box, with a fixed class."""

    gt_id: int
    class_label: str
    boxes: dict[int, Box3D]


@dataclass(frozen=True, slots=True)
class TrainingPair:
    """One labeled prompt: Yes iff the candidate continues the track."""

    prompt: PromptSequence
    label: str
    iou_target: float
    track_gt_id: int
    candidate_gt_id: int
    frame: int

    def __post_init__(self) -> None:
        if self.label not in ("Yes", "No"):
            raise ValueError(f"label must be Yes or No, got {self.label!r}")
        if (self.label == "Yes") != (self.track_gt_id == self.candidate_gt_id):
            raise ValueError("label must agree with gt identity")
        if not (0.0 <= self.iou_target <= 1.0):
            raise ValueError(f"iou_target must be in [0, 1], got {self.iou_target}")


@dataclass(frozen=True, slots=True)
class MiningConfig:
    jitter: JitterParams = field(default_factory=JitterParams)
    hard_radius: float = 8.0
    negatives_per_positive: int = 3
    history_len: int = 3
    strategy: str = STRATEGY_HARD
    seed: int = 0

    def __post_init__(self) -> None:
        if self.hard_radius <= 0.0:
            raise ValueError(f"hard_radius must be positive, got {self.hard_radius}")
        if self.negatives_per_positive < 0:
            raise ValueError(f"negatives_per_positive must be >= 0, got {self.negatives_per_positive}")
        if self.history_len < 1:
            raise ValueError(f"history_len must be >= 1, got {self.history_len}")
        if self.strategy not in _STRATEGIES:
            raise ValueError(f"strategy must be one of {_STRATEGIES}, got {self.strategy!r}")


def gt_tracks_from_scene(scene: SceneFile) -> list[GroundTruthTrack]:
    """Collect per-object trajectories; an id must keep one class throughout."""
    boxes: dict[int, dict[int, Box3D]] = {}
    labels: dict[int, str] = {}
    for frame in scene.frames:
        for g in frame.gt:
            if g.gt_id in labels and labels[g.gt_id] != g.label:
                raise ValueError(
                    f"gt id {g.gt_id} changes class from {labels[g.gt_id]!r} to {g.label!r}")
            labels[g.gt_id] = g.label
            boxes.setdefault(g.gt_id, {})[frame.index] = g.box
    return [GroundTruthTrack(gt_id=i, class_label=labels[i], boxes=boxes[i])
            for i in sorted(boxes)]


def _history_window(track: GroundTruthTrack, frame: int, history_len: int) -> list[Box3D]:
    window = [track.boxes[f] for f in range(frame - history_len, frame) if f in track.boxes]
    if frame not in track.boxes or not window:
        raise InsufficientHistory(
            f"gt id {track.gt_id} lacks history before frame {frame}")
    return window


def mine_positive(track: GroundTruthTrack, frame: int, cfg: MiningConfig,
                  ser_cfg: SerializerConfig, vocab: ClassVocabulary,
                  rng: np.random.Generator) -> TrainingPair:
    """Yes pair: true history plus a jittered copy of the true box at `frame`.

    The quality target is the overlap the jitter left between candidate and
    truth, so zero jitter gives exactly 1.0.
    """
    history = _history_window(track, frame, cfg.history_len)
    true_box = track.boxes[frame]
    candidate = jitter(true_box, cfg.jitter, rng)
    return TrainingPair(
        prompt=serialize_pair(history, track.class_label, candidate,
                              track.class_label, ser_cfg, vocab),
        label="Yes",
        iou_target=iou_3d(candidate, true_box),
        track_gt_id=track.gt_id,
        candidate_gt_id=track.gt_id,
        frame=frame,
    )


def mine_hard_negatives(track: GroundTruthTrack, frame: int,
                        all_tracks: list[GroundTruthTrack], cfg: MiningConfig,
                        ser_cfg: SerializerConfig, vocab: ClassVocabulary,
                        rng: np.random.Generator) -> list[TrainingPair]:
    """No pairs: same history, candidates from other objects at `frame`.

    hard: nearest wrong-identity boxes within hard_radius, nearest first.
    local: uniform draw among the wrong-identity boxes within hard_radius.
    random: uniform draw among all wrong-identity boxes regardless of range.
    The quality target measures confusability: overlap of the candidate with
    the anchor's true box (usually zero).
    """
    history = _history_window(track, frame, cfg.history_len)
    anchor = track.boxes[frame]
    others = [
        (center_distance_bev(other.boxes[frame], anchor), other.gt_id, other)
        for other in all_tracks
        if other.gt_id != track.gt_id and frame in other.boxes
    ]
    quota = cfg.negatives_per_positive
    if cfg.strategy == STRATEGY_HARD:
        pool = sorted(o for o in others if o[0] <= cfg.hard_radius)
        chosen = pool[:quota]
    elif cfg.strategy == STRATEGY_LOCAL:
        pool = sorted(o for o in others if o[0] <= cfg.hard_radius)
        idx = rng.permutation(len(pool))[:quota]
        chosen = [pool[i] for i in sorted(idx)]
    else:
        pool = sorted(others)
        idx = rng.permutation(len(pool))[:quota]
        chosen = [pool[i] for i in sorted(idx)]

    pairs: list[TrainingPair] = []
    for _, _, other in chosen:
        candidate = other.boxes[frame]
        pairs.append(TrainingPair(
            prompt=serialize_pair(history, track.class_label, candidate,
                                  other.class_label, ser_cfg, vocab),
            label="No",
            iou_target=iou_3d(candidate, anchor),
            track_gt_id=track.gt_id,
            candidate_gt_id=other.gt_id,
            frame=frame,
        ))
    return pairs


def mine_scene(scene: SceneFile, cfg: MiningConfig, ser_cfg: SerializerConfig,
               vocab: ClassVocabulary) -> list[TrainingPair]:
    """Mine every (track, frame) slot that has history; one positive plus up
    to the negative quota each. Per-frame generators keep workers independent."""
    tracks = gt_tracks_from_scene(scene)
    pairs: list[TrainingPair] = []
    for frame in sorted({f.index for f in scene.frames}):
        rng = np.random.default_rng([cfg.seed, frame])
        for track in tracks:
            try:
                pairs.append(mine_positive(track, frame, cfg, ser_cfg, vocab, rng))
            except InsufficientHistory:
                continue
            pairs.extend(mine_hard_negatives(track, frame, tracks, cfg, ser_cfg, vocab, rng))
    return pairs


def emit_dataset(pairs: list[TrainingPair], path: str | Path) -> None:
    """JSON-lines, one pair per line, in mining order."""
    with open(path, "w") as fh:
        for p in pairs:
            record = {
                "prompt": prompt_to_json(p.prompt),
                "label": p.label,
                "iou_target": p.iou_target,
                "meta": {
                    "track_gt_id": p.track_gt_id,
                    "candidate_gt_id": p.candidate_gt_id,
                    "frame": p.frame,
                },
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def load_dataset(path: str | Path) -> list[TrainingPair]:
    pairs: list[TrainingPair] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            meta = rec["meta"]
            pairs.append(TrainingPair(
                prompt=prompt_from_json(rec["prompt"]),
                label=str(rec["label"]),
                iou_target=float(rec["iou_target"]),
                track_gt_id=int(meta["track_gt_id"]),
                candidate_gt_id=int(meta["candidate_gt_id"]),
                frame=int(meta["frame"]),
            ))
    return pairs


@dataclass(frozen=True, slots=True)
class ThresholdSelection:
    """Best Yes/No decision threshold on scorer probability for a pair set."""

    threshold: float
    accuracy: float
    n_yes: int
    n_no: int


def select_threshold(pairs: list[TrainingPair], scorer: Scorer) -> ThresholdSelection:
    """Score all pairs and pick the probability cutoff maximizing accuracy of
    predicting Yes when p >= cutoff. Candidate cutoffs sit between adjacent
    distinct scores (plus one below all scores); the smallest optimum wins,
    which favors recall on the positive side.
    """
    if not pairs:
        raise ValueError("cannot calibrate a threshold on an empty pair set")
    requests = [ScoreRequest(prompt=p.prompt, pair_id=str(i)) for i, p in enumerate(pairs)]
    scores = [s.p for s in scorer.score_batch(requests)]
    labels = [p.label == "Yes" for p in pairs]

    distinct = sorted(set(scores))
    candidates = [0.0]
    candidates += [0.5 * (a + b) for a, b in zip(distinct, distinct[1:])]
    # One cutoff above every score so "always predict No" stays reachable.
    candidates.append(math.nextafter(distinct[-1], math.inf))

    best_threshold = 0.0
    best_correct = -1
    total = len(pairs)
    for t in candidates:
        correct = sum(1 for p, is_yes in zip(scores, labels) if (p >= t) == is_yes)
        if correct > best_correct:
            best_correct = correct
            best_threshold = t
    return ThresholdSelection(
        threshold=best_threshold,
        accuracy=best_correct / total,
        n_yes=sum(labels),
        n_no=total - sum(labels),
    )
