"""Independent numeric oracles for the test suite.

Nothing here shares a computational path with the library: volumes come from
point sampling with a rotate-into-frame membership test, not from polygon
clipping. Results are exact only in expectation, so callers compare against
them with sampling-scale tolerances.
"""

from __future__ import annotations

import math

import numpy as np

from ovmot3d import Box3D


def points_inside(box: Box3D, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Boolean mask of world points lying inside an oriented box."""
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    dx = x - box.x
    dy = y - box.y
    local_x = c * dx + s * dy
    local_y = -s * dx + c * dy
    return ((np.abs(local_x) <= box.l / 2.0)
            & (np.abs(local_y) <= box.w / 2.0)
            & (np.abs(z - box.z) <= box.h / 2.0))


def monte_carlo_iou_3d(a: Box3D, b: Box3D, n_samples: int = 1_000_000,
                       seed: int = 0) -> float:
    """Estimate 3D IoU by sampling uniformly inside box a.

    The intersection volume is vol(a) times the fraction of samples that land
    inside b; standard error is about 0.5 / sqrt(n) of vol(a).
    """
    rng = np.random.default_rng(seed)
    local = rng.random((n_samples, 3)) - 0.5
    px = local[:, 0] * a.l
    py = local[:, 1] * a.w
    pz = local[:, 2] * a.h
    c, s = math.cos(a.yaw), math.sin(a.yaw)
    world_x = a.x + c * px - s * py
    world_y = a.y + s * px + c * py
    world_z = a.z + pz
    vol_a = a.l * a.w * a.h
    vol_b = b.l * b.w * b.h
    inter = vol_a * float(points_inside(b, world_x, world_y, world_z).mean())
    union = vol_a + vol_b - inter
    return inter / union if union > 0.0 else 0.0


def monte_carlo_iou_bev(a: Box3D, b: Box3D, n_samples: int = 1_000_000,
                        seed: int = 0) -> float:
    """Footprint IoU by the same scheme, sampling in a's rectangle."""
    rng = np.random.default_rng(seed)
    local = rng.random((n_samples, 2)) - 0.5
    px = local[:, 0] * a.l
    py = local[:, 1] * a.w
    c, s = math.cos(a.yaw), math.sin(a.yaw)
    world_x = a.x + c * px - s * py
    world_y = a.y + s * px + c * py
    cb, sb = math.cos(b.yaw), math.sin(b.yaw)
    dx = world_x - b.x
    dy = world_y - b.y
    local_x = cb * dx + sb * dy
    local_y = -sb * dx + cb * dy
    inside = (np.abs(local_x) <= b.l / 2.0) & (np.abs(local_y) <= b.w / 2.0)
    area_a = a.l * a.w
    area_b = b.l * b.w
    inter = area_a * float(inside.mean())
    union = area_a + area_b - inter
    return inter / union if union > 0.0 else 0.0


def random_overlapping_pair(rng: np.random.Generator) -> tuple[Box3D, Box3D]:
    """Draw two boxes guaranteed to overlap: b is a perturbed copy of a whose
    center stays within half of a's extents."""
    l, w, h = rng.uniform(1.0, 6.0, size=3)
    a = Box3D(x=float(rng.uniform(-20.0, 20.0)), y=float(rng.uniform(-20.0, 20.0)),
              z=float(rng.uniform(0.0, 3.0)), l=float(l), w=float(w), h=float(h),
              yaw=float(rng.uniform(-math.pi, math.pi)), score=1.0)
    scale = rng.uniform(0.6, 1.4, size=3)
    b = Box3D(x=a.x + float(rng.uniform(-0.4, 0.4)) * a.l,
              y=a.y + float(rng.uniform(-0.4, 0.4)) * a.w,
              z=a.z + float(rng.uniform(-0.4, 0.4)) * a.h,
              l=a.l * float(scale[0]), w=a.w * float(scale[1]), h=a.h * float(scale[2]),
              yaw=float(rng.uniform(-math.pi, math.pi)), score=1.0)
    return a, b
