# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled rotated-box overlap kernels (hot path).

Mirror of ``_iou_py.py``: same clipping algorithm and operation order, so the
two backends agree to float noise. Selected at import by ``geometry``.
"""

from libc.math cimport cos, sin, fabs

cdef double AREA_EPS = 1e-12

BACKEND = "cython"


cdef inline void _corners(double cx, double cy, double l, double w, double yaw,
                          double* xs, double* ys) noexcept nogil:
    cdef double c = cos(yaw)
    cdef double s = sin(yaw)
    cdef double hl = 0.5 * l
    cdef double hw = 0.5 * w
    xs[0] = cx + c * hl - s * hw; ys[0] = cy + s * hl + c * hw
    xs[1] = cx - c * hl - s * hw; ys[1] = cy - s * hl + c * hw
    xs[2] = cx - c * hl + s * hw; ys[2] = cy - s * hl - c * hw
    xs[3] = cx + c * hl + s * hw; ys[3] = cy + s * hl - c * hw


cdef double _rect_inter_area(double cx1, double cy1, double l1, double w1, double yaw1,
                             double cx2, double cy2, double l2, double w2, double yaw2) noexcept nogil:
    # A rectangle/rectangle intersection has at most 8 vertices; 16 slots
    # leave room for the emit-both case mid-pass.
    cdef double sub_x[16]
    cdef double sub_y[16]
    cdef double out_x[16]
    cdef double out_y[16]
    cdef double clip_x[4]
    cdef double clip_y[4]
    cdef int n_sub, n_out, i, k
    cdef double ax, ay, bx, by, ex, ey
    cdef double sx, sy, px, py, dx, dy, denom, t
    cdef bint s_in, p_in
    cdef double acc, x0, y0

    _corners(cx1, cy1, l1, w1, yaw1, sub_x, sub_y)
    _corners(cx2, cy2, l2, w2, yaw2, clip_x, clip_y)
    n_sub = 4

    ax = clip_x[3]; ay = clip_y[3]
    for k in range(4):
        bx = clip_x[k]; by = clip_y[k]
        if n_sub == 0:
            break
        ex = bx - ax; ey = by - ay
        n_out = 0
        sx = sub_x[n_sub - 1]; sy = sub_y[n_sub - 1]
        s_in = ex * (sy - ay) - ey * (sx - ax) >= 0.0
        for i in range(n_sub):
            px = sub_x[i]; py = sub_y[i]
            p_in = ex * (py - ay) - ey * (px - ax) >= 0.0
            if p_in != s_in:
                dx = px - sx; dy = py - sy
                denom = ex * dy - ey * dx
                if denom != 0.0:
                    t = (ex * (ay - sy) - ey * (ax - sx)) / denom
                    out_x[n_out] = sx + t * dx
                    out_y[n_out] = sy + t * dy
                    n_out += 1
            if p_in:
                out_x[n_out] = px
                out_y[n_out] = py
                n_out += 1
            sx = px; sy = py; s_in = p_in
        for i in range(n_out):
            sub_x[i] = out_x[i]
            sub_y[i] = out_y[i]
        n_sub = n_out
        ax = bx; ay = by

    if n_sub < 3:
        return 0.0
    acc = 0.0
    x0 = sub_x[n_sub - 1]; y0 = sub_y[n_sub - 1]
    for i in range(n_sub):
        acc += x0 * sub_y[i] - sub_x[i] * y0
        x0 = sub_x[i]; y0 = sub_y[i]
    acc = 0.5 * fabs(acc)
    if acc < AREA_EPS:
        return 0.0
    return acc


cdef double _iou_bev(double cx1, double cy1, double l1, double w1, double yaw1,
                     double cx2, double cy2, double l2, double w2, double yaw2) noexcept nogil:
    cdef double inter, union_area, iou
    # Bitwise-identical boxes must give exactly 1.0; the clipped polygon's
    # shoelace area is not bit-exactly l*w, so do not rely on the quotient.
    if cx1 == cx2 and cy1 == cy2 and l1 == l2 and w1 == w2 and yaw1 == yaw2:
        return 1.0
    inter = _rect_inter_area(cx1, cy1, l1, w1, yaw1, cx2, cy2, l2, w2, yaw2)
    if inter == 0.0:
        return 0.0
    union_area = l1 * w1 + l2 * w2 - inter
    if union_area <= 0.0:
        return 0.0
    iou = inter / union_area
    if iou > 1.0:
        return 1.0
    return iou


cdef double _iou_3d(double cx1, double cy1, double cz1, double l1, double w1, double h1, double yaw1,
                    double cx2, double cy2, double cz2, double l2, double w2, double h2, double yaw2) noexcept nogil:
    cdef double top1, top2, bot1, bot2, top, bot, dz
    cdef double inter, inter_vol, union_vol, iou
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
    inter = _rect_inter_area(cx1, cy1, l1, w1, yaw1, cx2, cy2, l2, w2, yaw2)
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


def rect_intersection_area(double cx1, double cy1, double l1, double w1, double yaw1,
                           double cx2, double cy2, double l2, double w2, double yaw2):
    return _rect_inter_area(cx1, cy1, l1, w1, yaw1, cx2, cy2, l2, w2, yaw2)


def iou_bev_raw(double cx1, double cy1, double l1, double w1, double yaw1,
                double cx2, double cy2, double l2, double w2, double yaw2):
    return _iou_bev(cx1, cy1, l1, w1, yaw1, cx2, cy2, l2, w2, yaw2)


def iou_3d_raw(double cx1, double cy1, double cz1, double l1, double w1, double h1, double yaw1,
               double cx2, double cy2, double cz2, double l2, double w2, double h2, double yaw2):
    return _iou_3d(cx1, cy1, cz1, l1, w1, h1, yaw1, cx2, cy2, cz2, l2, w2, h2, yaw2)


def iou_3d_fill(double[:, :] a, double[:, :] b, double[:, :] out):
    """Fill ``out[i, j]`` with the 3D IoU of rows ``a[i]`` and ``b[j]``.

    Rows are ``[x, y, z, l, w, h, yaw]`` with ``z`` the vertical center.
    """
    cdef Py_ssize_t i, j
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t n = b.shape[0]
    with nogil:
        for i in range(m):
            for j in range(n):
                out[i, j] = _iou_3d(a[i, 0], a[i, 1], a[i, 2], a[i, 3], a[i, 4], a[i, 5], a[i, 6],
                                    b[j, 0], b[j, 1], b[j, 2], b[j, 3], b[j, 4], b[j, 5], b[j, 6])
