from __future__ import annotations

import math

from ovmot3d import Box3D, ClassVocabulary


def make_box(x: float = 0.0, y: float = 0.0, z: float = 0.0,
             l: float = 4.0, w: float = 2.0, h: float = 1.5,
             yaw: float = 0.0, score: float = 1.0) -> Box3D:
    return Box3D(x=x, y=y, z=z, l=l, w=w, h=h, yaw=yaw, score=score)


def unit_cube(x: float = 0.0, y: float = 0.0, z: float = 0.0,
              yaw: float = 0.0, score: float = 1.0) -> Box3D:
    return Box3D(x=x, y=y, z=z, l=1.0, w=1.0, h=1.0, yaw=yaw, score=score)


def small_vocab() -> ClassVocabulary:
    return ClassVocabulary(base_classes=frozenset({"Car", "Van", "Pedestrian"}),
                           novel_classes=frozenset({"Truck", "Bus", "Cyclist"}))


def straight_history(n: int, *, speed: float = 1.0, y: float = 0.0,
                     yaw: float = 0.0) -> list[Box3D]:
    """n boxes moving +x at constant speed, one frame apart."""
    return [make_box(x=speed * t, y=y, yaw=yaw) for t in range(n)]


QUARTER_TURN = math.pi / 4.0
