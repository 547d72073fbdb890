"""Wire protocol parsing and strict validation.

Request body::

    {"template_id": str,
     "pairs": [{"pair_id": str, "prompt": {"segments": [...],
                "track_class": str, "det_class": str, "history_len": int}}]}

Segments are ``{"text": str}`` or ``{"box": [9 numbers]}``. The box
feature layout is (x, y, z, l, w, h, vol, yaw, score); the final box
slot is the candidate, the preceding ones are the history window. Any
shape violation raises ProtocolError; exceeding the batch limit raises
OversizeBatch. Validation is deliberately strict: a service that
guesses around malformed prompts would mask client bugs that the
tracking engine's own response validation could never catch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import OversizeBatch, ProtocolError

FEATURE_DIM = 9


@dataclass(frozen=True, slots=True)
class ScorePair:
    """One validated pair: history feature rows plus the candidate row."""

    pair_id: str
    history: tuple[tuple[float, ...], ...]
    candidate: tuple[float, ...]
    text: str


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ProtocolError(message)


def _parse_box(values: object, where: str) -> tuple[float, ...]:
    _require(isinstance(values, list), f"{where}: box must be a list")
    _require(len(values) == FEATURE_DIM,
             f"{where}: box must have {FEATURE_DIM} numbers, got {len(values)}")
    out = []
    for v in values:
        _require(isinstance(v, (int, float)) and not isinstance(v, bool),
                 f"{where}: box entries must be numbers, got {v!r}")
        f = float(v)
        _require(math.isfinite(f), f"{where}: box entries must be finite, got {v!r}")
        out.append(f)
    return tuple(out)


def _parse_prompt(obj: object, where: str) -> tuple[tuple[tuple[float, ...], ...], str]:
    _require(isinstance(obj, dict), f"{where}: prompt must be an object")
    _require("segments" in obj, f"{where}: prompt missing 'segments'")
    segments = obj["segments"]
    _require(isinstance(segments, list), f"{where}: segments must be a list")
    for key, kind in (("track_class", str), ("det_class", str), ("history_len", int)):
        _require(key in obj, f"{where}: prompt missing {key!r}")
        _require(isinstance(obj[key], kind) and not isinstance(obj[key], bool),
                 f"{where}: {key} must be {kind.__name__}")

    boxes: list[tuple[float, ...]] = []
    texts: list[str] = []
    for k, seg in enumerate(segments):
        seg_where = f"{where}.segments[{k}]"
        _require(isinstance(seg, dict), f"{seg_where}: segment must be an object")
        if "text" in seg:
            _require("box" not in seg, f"{seg_where}: segment cannot be both text and box")
            _require(isinstance(seg["text"], str), f"{seg_where}: text must be a string")
            texts.append(seg["text"])
        elif "box" in seg:
            boxes.append(_parse_box(seg["box"], seg_where))
            texts.append("<box>")
        else:
            raise ProtocolError(f"{seg_where}: segment is neither text nor box")

    _require(len(boxes) >= 2, f"{where}: prompt needs history and candidate box slots")
    _require(obj["history_len"] == len(boxes) - 1,
             f"{where}: history_len {obj['history_len']} does not match "
             f"{len(boxes) - 1} history slots")
    return tuple(boxes), "".join(texts)


def parse_score_request(body: object, max_batch: int) -> tuple[str, list[ScorePair]]:
    """Validate a /v1/score body; returns (template_id, pairs)."""
    _require(isinstance(body, dict), "body must be a JSON object")
    _require("template_id" in body, "body missing 'template_id'")
    _require(isinstance(body["template_id"], str), "template_id must be a string")
    _require("pairs" in body, "body missing 'pairs'")
    pairs = body["pairs"]
    _require(isinstance(pairs, list), "pairs must be a list")
    if len(pairs) > max_batch:
        raise OversizeBatch(f"batch of {len(pairs)} exceeds max_batch {max_batch}")

    out: list[ScorePair] = []
    for i, pair in enumerate(pairs):
        where = f"pairs[{i}]"
        _require(isinstance(pair, dict), f"{where}: pair must be an object")
        _require("pair_id" in pair, f"{where}: pair missing 'pair_id'")
        _require(isinstance(pair["pair_id"], str), f"{where}: pair_id must be a string")
        _require("prompt" in pair, f"{where}: pair missing 'prompt'")
        boxes, text = _parse_prompt(pair["prompt"], f"{where}.prompt")
        out.append(ScorePair(pair_id=pair["pair_id"], history=boxes[:-1],
                             candidate=boxes[-1], text=text))
    return body["template_id"], out
