"""The compiled overlap kernel and its pure-Python twin must agree.

They execute the same operations in the same order; differences can only
come from compiler-level contraction, so tolerance is a few ulps.
"""

from __future__ import annotations

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from ovmot3d import geometry
from ovmot3d import _iou_py

from oracles import random_overlapping_pair

cython_kernels = pytest.importorskip("ovmot3d._iou_cy",
                                     reason="compiled backend not built")


def test_backends_agree_on_random_pairs() -> None:
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(500):
        a, b = random_overlapping_pair(rng)
        fa = (a.x, a.y, a.z, a.l, a.w, a.h, a.yaw)
        fb = (b.x, b.y, b.z, b.l, b.w, b.h, b.yaw)
        ga = (a.x, a.y, a.l, a.w, a.yaw)
        gb = (b.x, b.y, b.l, b.w, b.yaw)
        py3 = _iou_py.iou_3d_raw(*fa, *fb)
        cy3 = cython_kernels.iou_3d_raw(*fa, *fb)
        worst = max(worst, abs(py3 - cy3))
        py2 = _iou_py.iou_bev_raw(*ga, *gb)
        cy2 = cython_kernels.iou_bev_raw(*ga, *gb)
        worst = max(worst, abs(py2 - cy2))
    assert worst < 1e-14


def test_backends_agree_on_identity_and_disjoint() -> None:
    fields = (1.0, 2.0, 0.5, 4.0, 2.0, 1.5, 0.3)
    far = (50.0, 2.0, 0.5, 4.0, 2.0, 1.5, 0.3)
    assert _iou_py.iou_3d_raw(*fields, *fields) == 1.0
    assert cython_kernels.iou_3d_raw(*fields, *fields) == 1.0
    assert _iou_py.iou_3d_raw(*fields, *far) == 0.0
    assert cython_kernels.iou_3d_raw(*fields, *far) == 0.0


def test_fill_kernels_agree() -> None:
    rng = np.random.default_rng(1)
    rows = np.empty((6, 7))
    cols = np.empty((4, 7))
    for out in (rows, cols):
        for i in range(out.shape[0]):
            box, _ = random_overlapping_pair(rng)
            out[i] = (box.x, box.y, box.z, box.l, box.w, box.h, box.yaw)
    got_py = np.zeros((6, 4))
    got_cy = np.zeros((6, 4))
    _iou_py.iou_3d_fill(rows, cols, got_py)
    cython_kernels.iou_3d_fill(rows, cols, got_cy)
    assert np.max(np.abs(got_py - got_cy)) < 1e-14


def test_default_backend_is_compiled() -> None:
    assert geometry.backend_name() == "cython"


def test_env_var_forces_pure_python_backend() -> None:
    code = "from ovmot3d import geometry; print(geometry.backend_name())"
    env = {**os.environ, "OVMOT3D_NO_EXT": "1"}
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_rect_intersection_area_twin_values() -> None:
    # Quarter-turn octagon area, a value exercising the clipping loop deeply.
    expected = 2.0 * (math.sqrt(2.0) - 1.0)
    args = (0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, math.pi / 4.0)
    assert _iou_py.rect_intersection_area(*args) == pytest.approx(expected, abs=1e-12)
    assert cython_kernels.rect_intersection_area(*args) == pytest.approx(
        expected, abs=1e-12)
    assert abs(_iou_py.rect_intersection_area(*args)
               - cython_kernels.rect_intersection_area(*args)) < 1e-15
