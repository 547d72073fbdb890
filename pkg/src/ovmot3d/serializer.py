"""Serialization of a (track history, candidate detection) pair into an
interleaved prompt of text segments and numeric box slots.

Box coordinates ride as numeric feature vectors, never as formatted text, so
downstream consumers are independent of float formatting. Class names from the
novel side of the vocabulary (and any label the vocabulary does not know) can
be masked behind a placeholder string.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EmptyHistory
from .geometry import Box3D, volume

FEATURE_DIM = 9

DEFAULT_TEMPLATE_ID = "pairwise-v1"


@dataclass(frozen=True, slots=True)
class ClassVocabulary:
    """Known class labels, split into base and novel, plus the mask string."""

    base_classes: frozenset[str]
    novel_classes: frozenset[str]
    placeholder: str = "Unknown"

    def __post_init__(self) -> None:
        object.__setattr__(self, "base_classes", frozenset(self.base_classes))
        object.__setattr__(self, "novel_classes", frozenset(self.novel_classes))
        overlap = self.base_classes & self.novel_classes
        if overlap:
            raise ValueError(f"labels cannot be both base and novel: {sorted(overlap)}")
        if self.placeholder in self.base_classes or self.placeholder in self.novel_classes:
            raise ValueError(f"placeholder {self.placeholder!r} collides with a vocabulary label")


@dataclass(frozen=True, slots=True)
class GeometryFeature:
    """Numeric description of one box: [x, y, z, l, w, h, vol, yaw, score]."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != FEATURE_DIM:
            raise ValueError(f"expected {FEATURE_DIM} features, got {len(self.values)}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("features must be finite")
        if self.values[6] != self.values[3] * self.values[4] * self.values[5]:
            raise ValueError("volume entry must equal l*w*h")


@dataclass(frozen=True, slots=True)
class TextSegment:
    text: str


@dataclass(frozen=True, slots=True)
class BoxSlot:
    feature: GeometryFeature


Segment = TextSegment | BoxSlot


@dataclass(frozen=True, slots=True)
class PromptSequence:
    """Ordered text/box segments for one scoring query.

    Box slots run oldest history box to newest, then the candidate last;
    there are exactly ``history_len + 1`` of them.
    """

    segments: tuple[Segment, ...]
    track_class_rendered: str
    det_class_rendered: str
    history_len: int

    def __post_init__(self) -> None:
        n_slots = sum(1 for s in self.segments if isinstance(s, BoxSlot))
        if n_slots != self.history_len + 1:
            raise ValueError(f"expected {self.history_len + 1} box slots, found {n_slots}")

    def box_slots(self) -> list[GeometryFeature]:
        return [s.feature for s in self.segments if isinstance(s, BoxSlot)]

    def rendered_text(self) -> str:
        """Template text with each box slot shown as the ``<box>`` token."""
        return "".join(s.text if isinstance(s, TextSegment) else "<box>" for s in self.segments)


@dataclass(frozen=True, slots=True)
class SerializerConfig:
    """Prompt-construction settings.

    ``history_len`` must be at least 1: with no history context every pair
    becomes indistinguishable, so a zero window is refused outright instead of
    silently producing a degenerate prompt.
    """

    history_len: int = 3
    mask_novel: bool = True
    template_id: str = DEFAULT_TEMPLATE_ID

    def __post_init__(self) -> None:
        if self.history_len < 1:
            raise ValueError(f"history_len must be >= 1, got {self.history_len}")


def geometry_features(b: Box3D) -> GeometryFeature:
    """Extract the 9-entry feature vector [x, y, z, l, w, h, vol, yaw, score]."""
    return GeometryFeature(values=(b.x, b.y, b.z, b.l, b.w, b.h, volume(b), b.yaw, b.score))


def render_class(label: str, vocab: ClassVocabulary, mask_novel: bool) -> str:
    """Base labels pass through; novel and unrecognized labels are masked.

    Unrecognized labels count as novel: an open-vocabulary detector may emit
    any string, and leaking it would defeat the masking.
    """
    if label in vocab.base_classes:
        return label
    if mask_novel:
        return vocab.placeholder
    return label


def serialize_pair(history: list[Box3D], track_label: str, candidate: Box3D,
                   det_label: str, cfg: SerializerConfig, vocab: ClassVocabulary) -> PromptSequence:
    """Build the prompt for one (track, detection) pair.

    Keeps only the ``cfg.history_len`` newest history boxes. Both the track's
    and the candidate's class strings go through masking.
    """
    if not history:
        raise EmptyHistory("cannot serialize a track with no history")
    kept = history[-cfg.history_len:]
    track_cls = render_class(track_label, vocab, cfg.mask_novel)
    det_cls = render_class(det_label, vocab, cfg.mask_novel)

    segments: list[Segment] = [TextSegment(f"Track class: {track_cls}; history:")]
    for b in kept:
        segments.append(TextSegment(" "))
        segments.append(BoxSlot(geometry_features(b)))
    segments.append(TextSegment(f". Candidate class: {det_cls}: "))
    segments.append(BoxSlot(geometry_features(candidate)))
    segments.append(TextSegment(". Same object?"))

    return PromptSequence(
        segments=tuple(segments),
        track_class_rendered=track_cls,
        det_class_rendered=det_cls,
        history_len=len(kept),
    )


def prompt_to_json(ps: PromptSequence) -> dict:
    """Canonical JSON form: segments are {"text": ...} or {"box": [9 numbers]}."""
    segs: list[dict] = []
    for s in ps.segments:
        if isinstance(s, TextSegment):
            segs.append({"text": s.text})
        else:
            segs.append({"box": list(s.feature.values)})
    return {
        "segments": segs,
        "track_class": ps.track_class_rendered,
        "det_class": ps.det_class_rendered,
        "history_len": ps.history_len,
    }


def prompt_from_json(obj: dict) -> PromptSequence:
    """Inverse of :func:`prompt_to_json`; validates segment shape."""
    segments: list[Segment] = []
    for s in obj["segments"]:
        if "text" in s:
            segments.append(TextSegment(str(s["text"])))
        elif "box" in s:
            segments.append(BoxSlot(GeometryFeature(values=tuple(float(v) for v in s["box"]))))
        else:
            raise ValueError(f"segment is neither text nor box: {s!r}")
    return PromptSequence(
        segments=tuple(segments),
        track_class_rendered=str(obj["track_class"]),
        det_class_rendered=str(obj["det_class"]),
        history_len=int(obj["history_len"]),
    )
