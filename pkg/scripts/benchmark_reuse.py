#!/usr/bin/env python3
"""Measure the payoff of sharing one precomputed MLS basis across variants.

Every variant of a sample moves the same fixed anchor set, so the expensive,
target-independent half of the transform (weights, centroids, rotation
blocks at each lattice vertex) can be computed once and reused.  This script
times that strategy against recomputing the basis for every variant, which
is what a naive per-variant implementation would do.
"""

import argparse
import time

import numpy as np

from mlsaug.mls import precompute_basis, transform_lattice
from mlsaug.schemes import (
    direction_count,
    displace_points,
    displacement_length,
    enumerate_patterns,
    nine_point_grid,
)


def build_displacements(size: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    points = nine_point_grid(size, size, 0.23)
    length = displacement_length(size, size, 0.23, 0.14)
    patterns = enumerate_patterns(len(points), direction_count(0.25), count)
    displaced = np.stack(
        [displace_points(points, pat, length, 45.0, 90.0) for pat in patterns]
    )
    return points, displaced


def time_shared(points, displaced, size, alpha, grid, block) -> float:
    t0 = time.perf_counter()
    basis = precompute_basis(points, alpha=alpha, width=size, height=size,
                             spacing=grid)
    for lo in range(0, len(displaced), block):
        transform_lattice(basis, displaced[lo:lo + block])
    return time.perf_counter() - t0


def time_fresh(points, displaced, size, alpha, grid) -> float:
    t0 = time.perf_counter()
    for k in range(len(displaced)):
        basis = precompute_basis(points, alpha=alpha, width=size, height=size,
                                 spacing=grid)
        transform_lattice(basis, displaced[k])
    return time.perf_counter() - t0


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[28, 64, 128],
                    help="square image sizes to benchmark (default 28 64 128)")
    ap.add_argument("--count", type=int, default=2004,
                    help="variants per size (default 2004)")
    ap.add_argument("--block", type=int, default=256,
                    help="variants per batched lattice evaluation (default 256)")
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--grid", type=int, default=1,
                    help="lattice spacing in px (default 1)")
    args = ap.parse_args()

    print(f"{'size':>6} {'variants':>9} {'shared[s]':>10} {'fresh[s]':>10} "
          f"{'speedup':>8}")
    for size in args.sizes:
        points, displaced = build_displacements(size, args.count)
        shared = time_shared(points, displaced, size, args.alpha, args.grid,
                             args.block)
        fresh = time_fresh(points, displaced, size, args.alpha, args.grid)
        print(f"{size:>6} {len(displaced):>9} {shared:>10.3f} {fresh:>10.3f} "
              f"{fresh / shared:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
