"""Pure-Python rotated-box overlap kernels (fallback path).

Mirror of ``_iou_cy.pyx``: same clipping algorithm and operation order, so the
two backends agree to float noise. Selected at import by ``geometry``.
"""

from __future__ import annotations

import math

AREA_EPS = 1e-12

BACKEND = "python"


def _corners(cx: float, cy: float, l: float, w: float, yaw: float) -> list[tuple[float, float]]:
    c = math.cos(yaw)
    s = math.sin(yaw)
    hl = 0.5 * l
    hw = 0.5 * w
    return [
        (cx + c * hl - s * hw, cy + s * hl + c * hw),
        (cx - c * hl - s * hw, cy - s * hl + c * hw),
        (cx - c * hl + s * hw, cy - s * hl - c * hw),
        (cx + c * hl + s * hw, cy + s * hl - c * hw),
    ]


def rect_intersection_area(cx1: float, cy1: float, l1: float, w1: float, yaw1: float,
                           cx2: float, cy2: float, l2: float, w2: float, yaw2: float) -> float:
    subject = _corners(cx1, cy1, l1, w1, yaw1)
    clip = _corners(cx2, cy2, l2, w2, yaw2)

    ax, ay = clip[3]
    for bx, by in clip:
        if not subject:
            break
        ex = bx - ax
        ey = by - ay
        out: list[tuple[float, float]] = []
        sx, sy = subject[-1]
        s_in = ex * (sy - ay) - ey * (sx - ax) >= 0.0
        for px, py in subject:
            p_in = ex * (py - ay) - ey * (px - ax) >= 0.0
            if p_in != s_in:
                dx = px - sx
                dy = py - sy
                denom = ex * dy - ey * dx
                if denom != 0.0:
                    t = (ex * (ay - sy) - ey * (ax - sx)) / denom
                    out.append((sx + t * dx, sy + t * dy))
            if p_in:
                out.append((px, py))
            sx, sy, s_in = px, py, p_in
        subject = out
        ax, ay = bx, by

    if len(subject) < 3:
        return 0.0
    acc = 0.0
    x0, y0 = subject[-1]
    for x1, y1 in subject:
        acc += x0 * y1 - x1 * y0
        x0, y0 = x1, y1
    acc = 0.5 * abs(acc)
    if acc < AREA_EPS:
        return 0.0
    return acc


def iou_bev_raw(cx1: float, cy1: float, l1: float, w1: float, yaw1: float,
                cx2: float, cy2: float, l2: float, w2: float, yaw2: float) -> float:
    # Bitwise-identical boxes must give exactly 1.0; the clipped polygon's
    # shoelace area is not bit-exactly l*w, so do not rely on the quotient.
    if cx1 == cx2 and cy1 == cy2 and l1 == l2 and w1 == w2 and yaw1 == yaw2:
        return 1.0
    inter = rect_intersection_area(cx1, cy1, l1, w1, yaw1, cx2, cy2, l2, w2, yaw2)
    if inter == 0.0:
        return 0.0
    union_area = l1 * w1 + l2 * w2 - inter
    if union_area <= 0.0:
        return 0.0
    iou = inter / union_area
    if iou > 1.0:
        return 1.0
    return iou


def iou_3d_raw(cx1: float, cy1: float, cz1: float, l1: float, w1: float, h1: float, yaw1: float,
               cx2: float, cy2: float, cz2: float, l2: float, w2: float, h2: float, yaw2: float) -> float:
    if (cx1 == cx2 and cy1 == cy2 and cz1 == cz2
            and l1 == l2 and w1 == w2 and h1 == h2 and yaw1 == yaw2):
        return 1.0
    top1 = cz1 + 0.5 * h1
    top2 = cz2 + 0.5 * h2
    bot1 = cz1 - 0.5 * h1
    bot2 = cz2 - 0.5 * h2
    top = top1 if top1 < top2 else top2
    bot = bot1 if bot1 > bot2 else bot2
    dz = top - bot
    if dz <= 0.0:
        return 0.0
    inter = rect_intersection_area(cx1, cy1, l1, w1, yaw1, cx2, cy2, l2, w2, yaw2)
    if inter == 0.0:
        return 0.0
    inter_vol = inter * dz
    union_vol = l1 * w1 * h1 + l2 * w2 * h2 - inter_vol
    if union_vol <= 0.0:
        return 0.0
    iou = inter_vol / union_vol
    if iou > 1.0:
        return 1.0
    return iou


def iou_3d_fill(a, b, out) -> None:
    """Fill ``out[i, j]`` with the 3D IoU of rows ``a[i]`` and ``b[j]``.

    Rows are ``[x, y, z, l, w, h, yaw]`` with ``z`` the vertical center.
    """
    m = a.shape[0]
    n = b.shape[0]
    for i in range(m):
        ai = a[i]
        for j in range(n):
            bj = b[j]
            out[i, j] = iou_3d_raw(ai[0], ai[1], ai[2], ai[3], ai[4], ai[5], ai[6],
                                   bj[0], bj[1], bj[2], bj[3], bj[4], bj[5], bj[6])
