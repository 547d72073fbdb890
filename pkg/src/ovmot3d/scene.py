"""Normalized scene files: per-frame detections and ground truth in one JSON
document, with a fixed schema version and a canonical byte layout.

The on-disk ``z`` may be either the box center or the bottom face, declared in
the header; boxes are converted to center-``z`` at load so the rest of the
engine never sees the bottom-face convention. Writing always emits the
canonical center convention.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, SchemaVersionMismatch
from .geometry import Box3D
from .serializer import ClassVocabulary

SCHEMA_VERSION = 1

_Z_CONVENTIONS = ("center", "bottom")


@dataclass(frozen=True, slots=True)
class Detection:
    """One detector output: an oriented box (score inside) plus a class string."""

    box: Box3D
    label: str


@dataclass(frozen=True, slots=True)
class GtBox:
    """One ground-truth box with its persistent object identity."""

    gt_id: int
    box: Box3D
    label: str


@dataclass(frozen=True, slots=True)
class SceneFrame:
    index: int
    detections: tuple[Detection, ...]
    gt: tuple[GtBox, ...]


@dataclass(frozen=True, slots=True)
class SceneFile:
    """A full sequence: header metadata plus frames in increasing order."""

    frame_rate: float
    vocabulary: ClassVocabulary
    frames: tuple[SceneFrame, ...]

    def __post_init__(self) -> None:
        indices = [f.index for f in self.frames]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise ValueError("frame indices must be strictly increasing")


def _box_from_json(values: object, score: float, z_bottom: bool, where: str) -> Box3D:
    if not isinstance(values, list) or len(values) != 7:
        raise ParseError(f"{where}: box must be a 7-element array [x,y,z,l,w,h,yaw]")
    try:
        x, y, z, l, w, h, yaw = (float(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{where}: box entries must be numbers") from exc
    if z_bottom:
        z = z + 0.5 * h
    try:
        return Box3D(x=x, y=y, z=z, l=l, w=w, h=h, yaw=yaw, score=score)
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def _require(obj: dict, key: str, where: str) -> object:
    if key not in obj:
        raise ParseError(f"{where}: missing required field {key!r}")
    return obj[key]


def load_scene(path: str | Path) -> SceneFile:
    """Parse and validate a scene file; errors carry the offending JSON path."""
    raw = Path(path).read_text()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")

    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(f"{path}: schema_version {version!r}, expected {SCHEMA_VERSION}")

    header = _require(doc, "header", str(path))
    if not isinstance(header, dict):
        raise ParseError(f"{path}: header must be an object")
    z_conv = header.get("z_convention", "center")
    if z_conv not in _Z_CONVENTIONS:
        raise ParseError(f"header.z_convention: expected one of {_Z_CONVENTIONS}, got {z_conv!r}")
    z_bottom = z_conv == "bottom"
    try:
        frame_rate = float(header.get("frame_rate", 1.0))
    except (TypeError, ValueError) as exc:
        raise ParseError("header.frame_rate: must be a number") from exc
    vocab_obj = header.get("vocabulary", {})
    if not isinstance(vocab_obj, dict):
        raise ParseError("header.vocabulary: must be an object")
    try:
        vocab = ClassVocabulary(
            base_classes=frozenset(vocab_obj.get("base_classes", ())),
            novel_classes=frozenset(vocab_obj.get("novel_classes", ())),
            placeholder=vocab_obj.get("placeholder", "Unknown"),
        )
    except ValueError as exc:
        raise ParseError(f"header.vocabulary: {exc}") from exc

    frames_obj = _require(doc, "frames", str(path))
    if not isinstance(frames_obj, list):
        raise ParseError(f"{path}: frames must be an array")
    frames: list[SceneFrame] = []
    for fi, frame_obj in enumerate(frames_obj):
        where = f"frames[{fi}]"
        if not isinstance(frame_obj, dict):
            raise ParseError(f"{where}: must be an object")
        index = _require(frame_obj, "frame_index", where)
        if not isinstance(index, int):
            raise ParseError(f"{where}.frame_index: must be an integer")
        dets: list[Detection] = []
        for di, det_obj in enumerate(frame_obj.get("detections", ())):
            dwhere = f"{where}.detections[{di}]"
            if not isinstance(det_obj, dict):
                raise ParseError(f"{dwhere}: must be an object")
            try:
                score = float(_require(det_obj, "score", dwhere))
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{dwhere}.score: must be a number") from exc
            box = _box_from_json(_require(det_obj, "box", dwhere), score, z_bottom, f"{dwhere}.box")
            dets.append(Detection(box=box, label=str(_require(det_obj, "class", dwhere))))
        gts: list[GtBox] = []
        seen_ids: set[int] = set()
        for gi, gt_obj in enumerate(frame_obj.get("gt", ())):
            gwhere = f"{where}.gt[{gi}]"
            if not isinstance(gt_obj, dict):
                raise ParseError(f"{gwhere}: must be an object")
            gt_id = _require(gt_obj, "gt_id", gwhere)
            if not isinstance(gt_id, int):
                raise ParseError(f"{gwhere}.gt_id: must be an integer")
            if gt_id in seen_ids:
                raise ParseError(f"{gwhere}: duplicate gt_id {gt_id} in frame {index}")
            seen_ids.add(gt_id)
            box = _box_from_json(_require(gt_obj, "box", gwhere), 1.0, z_bottom, f"{gwhere}.box")
            gts.append(GtBox(gt_id=gt_id, box=box, label=str(_require(gt_obj, "class", gwhere))))
        frames.append(SceneFrame(index=index, detections=tuple(dets), gt=tuple(gts)))

    try:
        return SceneFile(frame_rate=frame_rate, vocabulary=vocab, frames=tuple(frames))
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def scene_to_json(scene: SceneFile) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "header": {
            "frame_rate": scene.frame_rate,
            "z_convention": "center",
            "vocabulary": {
                "base_classes": sorted(scene.vocabulary.base_classes),
                "novel_classes": sorted(scene.vocabulary.novel_classes),
                "placeholder": scene.vocabulary.placeholder,
            },
        },
        "frames": [
            {
                "frame_index": f.index,
                "detections": [
                    {
                        "box": [d.box.x, d.box.y, d.box.z, d.box.l, d.box.w, d.box.h, d.box.yaw],
                        "class": d.label,
                        "score": d.box.score,
                    }
                    for d in f.detections
                ],
                "gt": [
                    {
                        "gt_id": g.gt_id,
                        "box": [g.box.x, g.box.y, g.box.z, g.box.l, g.box.w, g.box.h, g.box.yaw],
                        "class": g.label,
                    }
                    for g in f.gt
                ],
            }
            for f in scene.frames
        ],
    }


def write_scene(scene: SceneFile, path: str | Path) -> None:
    """Serialize canonically: sorted keys, compact separators, center-z boxes.

    Identical scenes produce byte-identical files.
    """
    text = json.dumps(scene_to_json(scene), sort_keys=True, separators=(",", ":"))
    Path(path).write_text(text + "\n")
