"""Oriented 3D boxes and the geometric primitives built on them.

A box is an axis ``l`` along heading, ``w`` lateral, ``h`` vertical cuboid
centered at ``(x, y, z)`` and rotated by ``yaw`` about the vertical axis.
``z`` is the vertical center of the box, not its bottom face.

Overlap kernels come from the compiled extension when available and from the
pure-Python twin otherwise; set ``OVMOT3D_NO_EXT`` to force the fallback.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np

if os.environ.get("OVMOT3D_NO_EXT"):
    from . import _iou_py as _kernels
else:
    try:
        from . import _iou_cy as _kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _iou_py as _kernels

TAU = 2.0 * math.pi


def backend_name() -> str:
    """Name of the active overlap-kernel backend: ``cython`` or ``python``."""
    return _kernels.BACKEND


def normalize_yaw(yaw: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    r = math.remainder(yaw, TAU)
    # remainder() lands in [-pi, pi]; fold the closed lower endpoint up.
    if r <= -math.pi:
        r += TAU
    return r


def yaw_difference(a: float, b: float) -> float:
    """Smallest absolute angle between two headings, in [0, pi]."""
    d = abs(math.remainder(a - b, TAU))
    return min(d, TAU - d)


@dataclass(frozen=True, slots=True)
class Box3D:
    """Oriented 3D bounding box with a detector confidence score."""

    x: float
    y: float
    z: float
    l: float
    w: float
    h: float
    yaw: float
    score: float

    def __post_init__(self) -> None:
        if not (self.l > 0.0 and self.w > 0.0 and self.h > 0.0):
            raise ValueError(f"box extents must be positive, got l={self.l} w={self.w} h={self.h}")
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score must be in [0, 1], got {self.score}")
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z, self.yaw)):
            raise ValueError("box pose must be finite")
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))


@dataclass(frozen=True, slots=True)
class JitterParams:
    """Noise magnitudes for perturbing a box, plus the seed that drives them."""

    sigma_center: float = 0.0
    sigma_size_log: float = 0.0
    sigma_yaw: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sigma_center < 0.0 or self.sigma_size_log < 0.0 or self.sigma_yaw < 0.0:
            raise ValueError("jitter sigmas must be non-negative")


def volume(b: Box3D) -> float:
    """Box volume l*w*h in cubic meters."""
    return b.l * b.w * b.h


def _ordered(a: Box3D, b: Box3D) -> tuple[Box3D, Box3D]:
    # Canonical argument order makes iou(a, b) and iou(b, a) bitwise equal:
    # polygon clipping is not exactly symmetric in its operands.
    ka = (a.x, a.y, a.z, a.l, a.w, a.h, a.yaw)
    kb = (b.x, b.y, b.z, b.l, b.w, b.h, b.yaw)
    return (a, b) if ka <= kb else (b, a)


def iou_bev(a: Box3D, b: Box3D) -> float:
    """Intersection over union of the two rotated footprint rectangles."""
    a, b = _ordered(a, b)
    return _kernels.iou_bev_raw(a.x, a.y, a.l, a.w, a.yaw, b.x, b.y, b.l, b.w, b.yaw)


def iou_3d(a: Box3D, b: Box3D) -> float:
    """Volumetric intersection over union of two oriented boxes."""
    a, b = _ordered(a, b)
    return _kernels.iou_3d_raw(a.x, a.y, a.z, a.l, a.w, a.h, a.yaw,
                               b.x, b.y, b.z, b.l, b.w, b.h, b.yaw)


def center_distance_bev(a: Box3D, b: Box3D) -> float:
    """Euclidean distance between box centers in the ground plane."""
    return math.hypot(a.x - b.x, a.y - b.y)


def boxes_to_array(boxes: list[Box3D]) -> np.ndarray:
    """Stack boxes into an (N, 7) float64 array of [x, y, z, l, w, h, yaw] rows."""
    out = np.empty((len(boxes), 7), dtype=np.float64)
    for i, b in enumerate(boxes):
        out[i, 0] = b.x
        out[i, 1] = b.y
        out[i, 2] = b.z
        out[i, 3] = b.l
        out[i, 4] = b.w
        out[i, 5] = b.h
        out[i, 6] = b.yaw
    return out


def iou_3d_matrix(a: list[Box3D], b: list[Box3D]) -> np.ndarray:
    """Pairwise 3D IoU, shape (len(a), len(b))."""
    out = np.zeros((len(a), len(b)), dtype=np.float64)
    if len(a) and len(b):
        _kernels.iou_3d_fill(boxes_to_array(a), boxes_to_array(b), out)
    return out


def jitter(b: Box3D, p: JitterParams, rng: np.random.Generator) -> Box3D:
    """Perturb a box with Gaussian center noise, log-normal size noise and
    Gaussian yaw noise. The score is left untouched.

    Always consumes exactly seven normal draws so the generator advances the
    same way regardless of which sigmas are zero.
    """
    n = rng.normal(size=7)
    return replace(
        b,
        x=b.x + p.sigma_center * n[0],
        y=b.y + p.sigma_center * n[1],
        z=b.z + p.sigma_center * n[2],
        l=b.l * math.exp(p.sigma_size_log * n[3]),
        w=b.w * math.exp(p.sigma_size_log * n[4]),
        h=b.h * math.exp(p.sigma_size_log * n[5]),
        yaw=b.yaw + p.sigma_yaw * n[6],
    )
