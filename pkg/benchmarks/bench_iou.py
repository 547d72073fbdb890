"""Compare the compiled IoU kernels against the pure-Python twin.

Runs the scalar pairwise kernel and the vectorized fill kernel over the
same random boxes through both backends, checks they agree, and prints
wall-clock times with the speedup ratio.

Usage: python3 benchmarks/bench_iou.py [--pairs N] [--repeats R]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ovmot3d import _iou_py

try:
    from ovmot3d import _iou_cy
except ImportError:
    _iou_cy = None


def random_boxes(rng: np.random.Generator, n: int) -> np.ndarray:
    """(n, 7) rows of x, y, z, l, w, h, yaw clustered enough to overlap."""
    out = np.empty((n, 7))
    out[:, 0] = rng.uniform(-3.0, 3.0, n)
    out[:, 1] = rng.uniform(-3.0, 3.0, n)
    out[:, 2] = rng.uniform(-1.0, 1.0, n)
    out[:, 3] = rng.uniform(1.0, 6.0, n)
    out[:, 4] = rng.uniform(1.0, 3.0, n)
    out[:, 5] = rng.uniform(1.0, 3.0, n)
    out[:, 6] = rng.uniform(-np.pi, np.pi, n)
    return out


def time_scalar(mod, a: np.ndarray, b: np.ndarray, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for row_a, row_b in zip(a, b):
            mod.iou_3d_raw(row_a[0], row_a[1], row_a[2], row_a[3], row_a[4],
                           row_a[5], row_a[6],
                           row_b[0], row_b[1], row_b[2], row_b[3], row_b[4],
                           row_b[5], row_b[6])
        best = min(best, time.perf_counter() - start)
    return best


def time_fill(mod, a: np.ndarray, b: np.ndarray, repeats: int) -> float:
    out = np.empty((len(a), len(b)))
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        mod.iou_3d_fill(a, b, out)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pairs", type=int, default=20000,
                        help="pair count for the scalar kernel")
    parser.add_argument("--matrix", type=int, default=300,
                        help="side length for the NxN fill kernel")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    a = random_boxes(rng, args.pairs)
    b = random_boxes(rng, args.pairs)
    ma = random_boxes(rng, args.matrix)
    mb = random_boxes(rng, args.matrix)

    if _iou_cy is None:
        print("compiled backend not available; showing python numbers only")
    else:
        out_py = np.empty((args.matrix, args.matrix))
        out_cy = np.empty((args.matrix, args.matrix))
        _iou_py.iou_3d_fill(ma, mb, out_py)
        _iou_cy.iou_3d_fill(ma, mb, out_cy)
        worst = float(np.max(np.abs(out_py - out_cy)))
        print(f"backend agreement over {args.matrix}x{args.matrix} cells: "
              f"max |python - cython| = {worst:.2e}")

    print(f"\n{'kernel':<10} {'backend':<8} {'time':>10}  rate")
    rows = [("python", _iou_py)]
    if _iou_cy is not None:
        rows.append(("cython", _iou_cy))
    times: dict[tuple[str, str], float] = {}
    for name, mod in rows:
        t = time_scalar(mod, a, b, args.repeats)
        times[("scalar", name)] = t
        print(f"{'scalar':<10} {name:<8} {t * 1e3:>8.1f}ms  "
              f"{args.pairs / t / 1e3:,.0f}k pairs/s")
    n_cells = args.matrix * args.matrix
    for name, mod in rows:
        t = time_fill(mod, ma, mb, args.repeats)
        times[("fill", name)] = t
        print(f"{'fill':<10} {name:<8} {t * 1e3:>8.1f}ms  "
              f"{n_cells / t / 1e3:,.0f}k cells/s")

    if _iou_cy is not None:
        for kernel in ("scalar", "fill"):
            ratio = times[(kernel, "python")] / times[(kernel, "cython")]
            print(f"{kernel}: cython is {ratio:.1f}x faster")


if __name__ == "__main__":
    main()
