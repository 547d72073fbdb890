"""Deterministic parity scorer.

Re-derives the tracking engine's geometric association score from the
prompt's box slots alone, with an independently written rotated-IoU
(shapely polygon clipping instead of the engine's own clipper). Text
segments are ignored entirely, which pins the protocol semantics to the
numeric slots rather than to any particular template wording.

Score definition, matching the engine's reference scorer:

    pred = constant-velocity extrapolation of the last two history centers
    p    = w_iou * iou3d(pred, cand) + (1 - w_iou) * exp(-bev_dist / tau_d)
    q    = iou3d(pred, cand)

Feature rows are (x, y, z, l, w, h, vol, yaw, score); volumes are
recomputed from l*w*h rather than trusting the vol field, as the engine
does.
"""

from __future__ import annotations

import math

from shapely.geometry import Polygon

from .config import ServiceConfig
from .protocol import ScorePair

# Feature row indices.
_X, _Y, _Z, _L, _W, _H, _VOL, _YAW, _SCORE = range(9)


def _footprint(row: tuple[float, ...]) -> Polygon:
    cx, cy = row[_X], row[_Y]
    dx, dy = row[_L] / 2.0, row[_W] / 2.0
    c, s = math.cos(row[_YAW]), math.sin(row[_YAW])
    corners = [
        (cx + c * dx - s * dy, cy + s * dx + c * dy),
        (cx - c * dx - s * dy, cy - s * dx + c * dy),
        (cx - c * dx + s * dy, cy - s * dx - c * dy),
        (cx + c * dx + s * dy, cy + s * dx - c * dy),
    ]
    return Polygon(corners)


def rotated_iou_3d(a: tuple[float, ...], b: tuple[float, ...]) -> float:
    """3D IoU of two feature rows: BEV polygon overlap times z-slab overlap."""
    # Identical geometry must give exactly 1.0; the engine kernel makes the
    # same guarantee, and the polygon-area quotient alone would not.
    if all(a[i] == b[i] for i in (_X, _Y, _Z, _L, _W, _H, _YAW)):
        return 1.0
    inter_area = _footprint(a).intersection(_footprint(b)).area
    if inter_area <= 0.0:
        return 0.0
    za = (a[_Z] - a[_H] / 2.0, a[_Z] + a[_H] / 2.0)
    zb = (b[_Z] - b[_H] / 2.0, b[_Z] + b[_H] / 2.0)
    dz = min(za[1], zb[1]) - max(za[0], zb[0])
    if dz <= 0.0:
        return 0.0
    inter = inter_area * dz
    vol_a = a[_L] * a[_W] * a[_H]
    vol_b = b[_L] * b[_W] * b[_H]
    union = vol_a + vol_b - inter
    if union <= 0.0:
        return 0.0
    iou = inter / union
    return min(max(iou, 0.0), 1.0)


def _predict(history: tuple[tuple[float, ...], ...]) -> tuple[float, ...]:
    """One-frame constant-velocity extrapolation of the newest center.

    Extent, yaw and score carry over from the newest box; a single-entry
    history predicts in place.
    """
    newest = history[-1]
    if len(history) == 1:
        return newest
    prev = history[-2]
    return (
        newest[_X] + (newest[_X] - prev[_X]),
        newest[_Y] + (newest[_Y] - prev[_Y]),
        newest[_Z] + (newest[_Z] - prev[_Z]),
        newest[_L], newest[_W], newest[_H], newest[_VOL],
        newest[_YAW], newest[_SCORE],
    )


def parity_score(pair: ScorePair, cfg: ServiceConfig) -> tuple[float, float]:
    """(p, q) for one validated pair."""
    pred = _predict(pair.history)
    overlap = rotated_iou_3d(pred, pair.candidate)
    dist = math.hypot(pred[_X] - pair.candidate[_X], pred[_Y] - pair.candidate[_Y])
    p = cfg.w_iou * overlap + (1.0 - cfg.w_iou) * math.exp(-dist / cfg.tau_d)
    if p > 1.0:
        p = 1.0
    return p, overlap
