"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times each hot kernel on detection-sized inputs, then one full partition
detect, for every available backend. Reports the best of ``--repeat`` runs.
"""

import argparse
import time

import numpy as np

from evmod import _kernels
from evmod.detect import detect_partition
from evmod.events import partition
from evmod.synth import generate, well_separated


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    pts = rng.random((1000, 3))
    small = rng.random((63, 3))
    emb = rng.random((1000, 10))
    cent = rng.random((10, 10))
    labels = rng.integers(0, 10, size=1000)
    scene = generate(well_separated(5, 0), 0)
    part = partition(scene.stream, scene.partition_spec)[0]
    return {
        "knn_bruteforce N=63 k=30": lambda: _kernels.knn_bruteforce(small, 30),
        "knn_bruteforce N=1000 k=30": lambda: _kernels.knn_bruteforce(pts, 30),
        "assign_nearest N=1000 k=10": lambda: _kernels.assign_nearest(emb, cent),
        "cluster_distance_sums N=1000 c=10": lambda: _kernels.cluster_distance_sums(pts, labels, 10),
        "detect_partition (5 objects)": lambda: detect_partition(part),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = _kernels.available_backends()
    table = {}
    for name in backends:
        prev = _kernels.use_backend(name)
        try:
            for label, fn in cases().items():
                fn()  # warm up
                table.setdefault(label, {})[name] = best_of(fn, args.repeat)
        finally:
            _kernels.use_backend(prev)
    width = max(map(len, table))
    print(f"{'kernel':<{width}}  " + "  ".join(f"{b:>10}" for b in backends)
          + ("     speedup" if len(backends) == 2 else ""))
    for label, row in table.items():
        line = f"{label:<{width}}  " + "  ".join(f"{1e3 * row[b]:8.2f}ms" for b in backends)
        if len(backends) == 2:
            line += f"  {row['python'] / row['compiled']:9.1f}x"
        print(line)
    if len(backends) == 1:
        print("compiled extension not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
