"""Benchmark the compiled kernels against the numpy reference backend.

Run from the repo root:

    python3 benchmarks/bench_kernels.py [--queries 20000] [--split-rows 7500]

Times the two hot paths (prism ray casting and the CART split sweep) on both
backends and verifies that their outputs agree while at it.
"""

import argparse
import time

import numpy as np

from sigclass import _kernels_py
from sigclass.geometry import RAY_EPS, direction_from_az_el
from sigclass.scene import Building, Receiver, UrbanScene

try:
    from sigclass import _kernels
except ImportError:
    _kernels = None


def bench_scene():
    buildings = []
    rng = np.random.default_rng(0)
    for i in range(8):
        cx, cy = rng.uniform(-60.0, 60.0, size=2)
        hw, hl = rng.uniform(5.0, 20.0, size=2)
        fp = ((cx - hw, cy - hl), (cx + hw, cy - hl), (cx + hw, cy + hl), (cx - hw, cy + hl))
        buildings.append(Building(fp, float(rng.uniform(10.0, 40.0))))
    return UrbanScene("bench", buildings, [Receiver("r1", (150.0, 150.0, 1.5))])


def time_ray_hits(backend, scene, dirs):
    origin = np.array([0.0, 0.0, 1.5])
    args = (scene.facades, scene.roof_offsets, scene.roof_verts, scene.roof_heights)
    start = time.perf_counter()
    hits = [backend.ray_hits(origin, d, *args, RAY_EPS, np.inf) for d in dirs]
    return time.perf_counter() - start, hits


def time_best_split(backend, X, y, repeats=20):
    start = time.perf_counter()
    for _ in range(repeats):
        result = backend.best_split(X, y, 5, 0.0)
    return (time.perf_counter() - start) / repeats, result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--queries", type=int, default=20000)
    parser.add_argument("--split-rows", type=int, default=7500)
    args = parser.parse_args()

    if _kernels is None:
        raise SystemExit("compiled extension not built; nothing to compare against")

    scene = bench_scene()
    rng = np.random.default_rng(42)
    dirs = [
        direction_from_az_el(float(az), float(el))
        for az, el in zip(rng.uniform(0, 360, args.queries), rng.uniform(0, 90, args.queries))
    ]
    X = np.ascontiguousarray(
        np.column_stack([
            rng.uniform(0, 90, args.split_rows),
            rng.uniform(25, 51, args.split_rows),
            rng.uniform(-10, 15, args.split_rows),
        ])
    )
    y = rng.integers(0, 3, args.split_rows).astype(np.int64)

    t_py, hits_py = time_ray_hits(_kernels_py, scene, dirs)
    t_cy, hits_cy = time_ray_hits(_kernels, scene, dirs)
    assert hits_py == hits_cy, "backends disagree on ray_hits"
    print(f"ray_hits    x{args.queries}: python {t_py:8.3f}s   cython {t_cy:8.3f}s"
          f"   speedup {t_py / t_cy:5.1f}x")

    s_py, r_py = time_best_split(_kernels_py, X, y)
    s_cy, r_cy = time_best_split(_kernels, X, y)
    assert r_py == r_cy, "backends disagree on best_split"
    print(f"best_split n={args.split_rows}: python {s_py:8.4f}s   cython {s_cy:8.4f}s"
          f"   speedup {s_py / s_cy:5.1f}x")


if __name__ == "__main__":
    main()
