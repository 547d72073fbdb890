"""Batch pairwise association scorers.

Two implementations sit behind one interface: a deterministic in-process
scorer built from constant-velocity prediction plus an IoU/distance blend,
and an HTTP client for a remote scoring service speaking the wire protocol
in :mod:`ovmot3d.serializer`. Scores are probabilities that the candidate
detection continues the track.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import requests

from .errors import MalformedResponse, ScorerUnavailable
from .geometry import Box3D, center_distance_bev, iou_3d
from .serializer import PromptSequence, prompt_to_json

MAX_BATCH_PAIRS = 256


@dataclass(frozen=True, slots=True)
class AssociationScore:
    """Match probability ``p`` and optional overlap-quality estimate ``q``."""

    p: float
    q: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if self.q is not None and not (0.0 <= self.q <= 1.0):
            raise ValueError(f"q must be in [0, 1], got {self.q}")


@dataclass(frozen=True, slots=True)
class ScoreRequest:
    """One prompt to score, tagged with a batch-unique identifier."""

    prompt: PromptSequence
    pair_id: str


@dataclass(frozen=True, slots=True)
class GeoScorerParams:
    """Blend weight and distance scale for the geometric reference scorer."""

    w_iou: float = 0.5
    tau_d: float = 2.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.w_iou <= 1.0):
            raise ValueError(f"w_iou must be in [0, 1], got {self.w_iou}")
        if self.tau_d <= 0.0:
            raise ValueError(f"tau_d must be positive, got {self.tau_d}")


class Scorer(Protocol):
    def score_batch(self, batch: list[ScoreRequest]) -> list[AssociationScore]:
        """Return one score per request, in request order."""
        ...


def predict_next(history: list[Box3D], dt_frames: int) -> Box3D:
    """Extrapolate the track center ``dt_frames`` ahead at constant velocity.

    Velocity comes from the last two history centers; a single-entry history
    predicts in place. Extent, yaw and score are carried from the newest box.
    """
    if not history:
        raise ValueError("history must be non-empty")
    newest = history[-1]
    if dt_frames == 0 or len(history) == 1:
        return newest
    prev = history[-2]
    return Box3D(
        x=newest.x + dt_frames * (newest.x - prev.x),
        y=newest.y + dt_frames * (newest.y - prev.y),
        z=newest.z + dt_frames * (newest.z - prev.z),
        l=newest.l, w=newest.w, h=newest.h,
        yaw=newest.yaw, score=newest.score,
    )


def geometric_score(history: list[Box3D], candidate: Box3D,
                    params: GeoScorerParams) -> AssociationScore:
    """Blend of predicted-box IoU and an exponential BEV-distance kernel.

    ``p = w_iou * iou + (1 - w_iou) * exp(-dist / tau_d)``; ``q`` is the raw
    IoU between prediction and candidate.
    """
    pred = predict_next(history, 1)
    overlap = iou_3d(pred, candidate)
    dist = center_distance_bev(pred, candidate)
    p = params.w_iou * overlap + (1.0 - params.w_iou) * math.exp(-dist / params.tau_d)
    # Guard the convex combination against float spill just above 1.
    if p > 1.0:
        p = 1.0
    return AssociationScore(p=p, q=overlap)


@dataclass(frozen=True, slots=True)
class GeometricScorer:
    """In-process deterministic scorer over serialized prompts.

    Reconstructs the history and candidate boxes from the prompt's box slots,
    so it exercises the exact same data path as a remote scorer.
    """

    params: GeoScorerParams = GeoScorerParams()

    def score_batch(self, batch: list[ScoreRequest]) -> list[AssociationScore]:
        out: list[AssociationScore] = []
        for req in batch:
            slots = req.prompt.box_slots()
            boxes = [_box_from_feature(f.values) for f in slots]
            out.append(geometric_score(boxes[:-1], boxes[-1], self.params))
        return out


def _box_from_feature(values: tuple[float, ...]) -> Box3D:
    x, y, z, l, w, h, _vol, yaw, score = values
    return Box3D(x=x, y=y, z=z, l=l, w=w, h=h, yaw=yaw, score=score)


@dataclass(frozen=True, slots=True)
class RemoteScorer:
    """HTTP client for the scoring service.

    Batches larger than ``max_batch`` are split into sequential chunks. A
    transport failure is retried once; a second failure surfaces as
    ScorerUnavailable. Responses are validated strictly: wrong pair count,
    misaligned pair_ids or out-of-range probabilities raise MalformedResponse.
    """

    endpoint: str
    template_id: str
    timeout_s: float = 10.0
    max_batch: int = MAX_BATCH_PAIRS

    def score_batch(self, batch: list[ScoreRequest]) -> list[AssociationScore]:
        out: list[AssociationScore] = []
        for start in range(0, len(batch), self.max_batch):
            out.extend(self._score_chunk(batch[start:start + self.max_batch]))
        return out

    def _score_chunk(self, chunk: list[ScoreRequest]) -> list[AssociationScore]:
        if not chunk:
            return []
        body = {
            "template_id": self.template_id,
            "pairs": [{"pair_id": r.pair_id, "prompt": prompt_to_json(r.prompt)} for r in chunk],
        }
        url = self.endpoint.rstrip("/") + "/v1/score"
        payload = self._post_with_retry(url, body)
        return _parse_scores(payload, [r.pair_id for r in chunk])

    def _post_with_retry(self, url: str, body: dict) -> dict:
        last_error: Exception | None = None
        for _ in range(2):
            try:
                resp = requests.post(url, json=body, timeout=self.timeout_s)
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code >= 500:
                raise ScorerUnavailable(
                    f"scoring service failed with HTTP {resp.status_code}: {resp.text[:200]}")
            if resp.status_code != 200:
                raise MalformedResponse(
                    f"scoring service rejected the batch with HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                return resp.json()
            except ValueError as exc:
                raise MalformedResponse(f"response body is not JSON: {exc}") from exc
        raise ScorerUnavailable(f"scoring service unreachable at {url}: {last_error}")


def _parse_scores(payload: dict, expected_ids: list[str]) -> list[AssociationScore]:
    try:
        scores = payload["scores"]
    except (TypeError, KeyError) as exc:
        raise MalformedResponse("response missing 'scores' array") from exc
    if not isinstance(scores, list) or len(scores) != len(expected_ids):
        got = len(scores) if isinstance(scores, list) else "non-list"
        raise MalformedResponse(f"expected {len(expected_ids)} scores, got {got}")
    out: list[AssociationScore] = []
    for entry, pair_id in zip(scores, expected_ids):
        try:
            got_id = entry["pair_id"]
            p = entry["p"]
            q = entry.get("q")
        except (TypeError, KeyError, AttributeError) as exc:
            raise MalformedResponse(f"malformed score entry: {entry!r}") from exc
        if got_id != pair_id:
            raise MalformedResponse(f"pair_id mismatch: expected {pair_id!r}, got {got_id!r}")
        if not isinstance(p, (int, float)) or not (0.0 <= float(p) <= 1.0):
            raise MalformedResponse(f"p out of range for pair {pair_id!r}: {p!r}")
        if q is not None and (not isinstance(q, (int, float)) or not (0.0 <= float(q) <= 1.0)):
            raise MalformedResponse(f"q out of range for pair {pair_id!r}: {q!r}")
        out.append(AssociationScore(p=float(p), q=None if q is None else float(q)))
    return out
