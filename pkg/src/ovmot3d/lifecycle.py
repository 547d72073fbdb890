"""The strictly online tracking loop: gate, serialize, score, assign, then
update track state with births and deaths.

One Tracker instance owns one sequence. Track ids are assigned monotonically
and never reused; a track's class label is fixed by its founding detection and
masked only at serialization time. Unmatched tracks coast silently (no output
box) for up to ``max_age`` missed frames before dying.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

from .assignment import build_cost, gate, solve, threshold_filter
from .errors import NonMonotonicFrame
from .geometry import Box3D
from .scene import Detection, SceneFile
from .scoring import ScoreRequest, Scorer
from .serializer import ClassVocabulary, SerializerConfig, serialize_pair


class TrackState(Enum):
    TENTATIVE = "tentative"
    ACTIVE = "active"
    DEAD = "dead"


@dataclass
class Track:
    """Mutable per-object state; history holds (frame_index, box) pairs."""

    id: int
    class_label: str
    history: deque[tuple[int, Box3D]]
    born_at: int
    state: TrackState
    miss_count: int = 0
    hit_count: int = 1

    def boxes(self) -> list[Box3D]:
        return [b for _, b in self.history]


@dataclass(frozen=True, slots=True)
class LifecycleConfig:
    """Birth, death and acceptance policy for the per-frame loop."""

    max_age: int = 3
    history_capacity: int = 10
    birth_score: float = 0.3
    confirm_hits: int = 1
    gate_dist: float = 10.0
    accept_max_cost: float = 0.9

    def __post_init__(self) -> None:
        if self.max_age < 0:
            raise ValueError(f"max_age must be >= 0, got {self.max_age}")
        if self.history_capacity < 1:
            raise ValueError(f"history_capacity must be >= 1, got {self.history_capacity}")
        if not (0.0 <= self.birth_score <= 1.0):
            raise ValueError(f"birth_score must be in [0, 1], got {self.birth_score}")
        if self.confirm_hits < 1:
            raise ValueError(f"confirm_hits must be >= 1, got {self.confirm_hits}")
        if self.gate_dist <= 0.0:
            raise ValueError(f"gate_dist must be positive, got {self.gate_dist}")
        if not (0.0 <= self.accept_max_cost <= 1.0):
            raise ValueError(f"accept_max_cost must be in [0, 1], got {self.accept_max_cost}")


@dataclass(frozen=True, slots=True)
class TrackOutput:
    track_id: int
    box: Box3D
    class_label: str
    score: float


@dataclass(frozen=True, slots=True)
class FrameResult:
    frame_index: int
    outputs: tuple[TrackOutput, ...]
    births: tuple[int, ...]
    deaths: tuple[int, ...]

    def __post_init__(self) -> None:
        ids = [o.track_id for o in self.outputs]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate track id in frame outputs")


class Tracker:
    """Single-sequence online tracker; step() must see increasing frames."""

    def __init__(self, scorer: Scorer, lifecycle: LifecycleConfig,
                 serializer: SerializerConfig, vocab: ClassVocabulary) -> None:
        if lifecycle.history_capacity < serializer.history_len:
            raise ValueError(
                f"history_capacity {lifecycle.history_capacity} is smaller than "
                f"the serializer history window {serializer.history_len}")
        self.scorer = scorer
        self.lifecycle = lifecycle
        self.serializer = serializer
        self.vocab = vocab
        self.tracks: list[Track] = []
        self._next_id = 1
        self._last_frame: int | None = None

    def step(self, frame_index: int, detections: list[Detection]) -> FrameResult:
        if self._last_frame is not None and frame_index <= self._last_frame:
            raise NonMonotonicFrame(
                f"frame {frame_index} does not follow frame {self._last_frame}")
        self._last_frame = frame_index

        live = [t for t in self.tracks if t.state is not TrackState.DEAD]
        det_boxes = [d.box for d in detections]

        candidates = gate([t.boxes() for t in live], det_boxes, self.lifecycle.gate_dist)
        requests = [
            ScoreRequest(
                prompt=serialize_pair(live[i].boxes(), live[i].class_label,
                                      detections[j].box, detections[j].label,
                                      self.serializer, self.vocab),
                pair_id=f"{frame_index}:{live[i].id}:{j}",
            )
            for i, j in candidates.pairs
        ]
        scores = self.scorer.score_batch(requests)
        score_map = {pair: s.p for pair, s in zip(candidates.pairs, scores)}

        cost = build_cost(score_map, len(live), len(detections), candidates)
        assignment = threshold_filter(solve(cost), cost, self.lifecycle.accept_max_cost)

        outputs: list[TrackOutput] = []
        births: list[int] = []
        deaths: list[int] = []

        for i, j in assignment.sorted_matches():
            track = live[i]
            det = detections[j]
            track.history.append((frame_index, det.box))
            track.miss_count = 0
            track.hit_count += 1
            if track.state is TrackState.TENTATIVE and track.hit_count >= self.lifecycle.confirm_hits:
                track.state = TrackState.ACTIVE
            if track.state is TrackState.ACTIVE:
                outputs.append(TrackOutput(track.id, det.box, track.class_label, det.box.score))

        for i in sorted(assignment.unmatched_tracks):
            track = live[i]
            track.miss_count += 1
            if track.miss_count > self.lifecycle.max_age:
                track.state = TrackState.DEAD
                deaths.append(track.id)

        for j in sorted(assignment.unmatched_dets):
            det = detections[j]
            if det.box.score >= self.lifecycle.birth_score:
                state = TrackState.ACTIVE if self.lifecycle.confirm_hits <= 1 else TrackState.TENTATIVE
                track = Track(
                    id=self._next_id,
                    class_label=det.label,
                    history=deque([(frame_index, det.box)],
                                  maxlen=self.lifecycle.history_capacity),
                    born_at=frame_index,
                    state=state,
                )
                self._next_id += 1
                self.tracks.append(track)
                births.append(track.id)
                if track.state is TrackState.ACTIVE:
                    outputs.append(TrackOutput(track.id, det.box, track.class_label, det.box.score))

        return FrameResult(
            frame_index=frame_index,
            outputs=tuple(sorted(outputs, key=lambda o: o.track_id)),
            births=tuple(births),
            deaths=tuple(deaths),
        )

    def run_sequence(self, stream: Iterable[tuple[int, list[Detection]]]) -> list[FrameResult]:
        """Fold step over an ordered (frame_index, detections) stream."""
        return [self.step(idx, dets) for idx, dets in stream]


def scene_stream(scene: SceneFile) -> Iterable[tuple[int, list[Detection]]]:
    """Adapt a SceneFile to the (frame_index, detections) stream shape."""
    for frame in scene.frames:
        yield frame.index, list(frame.detections)


def write_tracking_jsonl(results: list[FrameResult], path: str | Path) -> None:
    """One record per output track per frame, in frame order."""
    with open(path, "w") as fh:
        for res in results:
            for out in res.outputs:
                b = out.box
                record = {
                    "frame": res.frame_index,
                    "track_id": out.track_id,
                    "class": out.class_label,
                    "box": [b.x, b.y, b.z, b.l, b.w, b.h, b.yaw],
                    "score": out.score,
                }
                fh.write(json.dumps(record, sort_keys=True) + "\n")


def load_tracking_jsonl(path: str | Path) -> dict[int, list[TrackOutput]]:
    """Read tracking output back as frame_index -> outputs."""
    frames: dict[int, list[TrackOutput]] = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            x, y, z, l, w, h, yaw = (float(v) for v in rec["box"])
            box = Box3D(x=x, y=y, z=z, l=l, w=w, h=h, yaw=yaw, score=float(rec["score"]))
            frames.setdefault(int(rec["frame"]), []).append(
                TrackOutput(track_id=int(rec["track_id"]), box=box,
                            class_label=str(rec["class"]), score=float(rec["score"])))
    return frames
