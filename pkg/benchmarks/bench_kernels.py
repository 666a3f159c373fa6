"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints the best wall time per call for each kernel and backend, plus one
end-to-end filtering run over synthetic clips with each backend.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from egokit import _kernels_py

try:
    from egokit import _kernels as compiled
except ImportError:
    compiled = None


def best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


FILTER_SNIPPET = """
import sys, time, numpy as np
sys.path.insert(0, {tests!r})
from conftest import random_clip
from egokit import kernels
from egokit.curation import run_pipeline
rng = np.random.default_rng(0)
clips = [random_clip(rng, str(i), max_frames=300) for i in range(300)]
t0 = time.perf_counter()
list(run_pipeline(clips))
print(kernels.BACKEND, time.perf_counter() - t0)
"""


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if compiled is None:
        print("compiled extension not built; only the fallback is available", file=sys.stderr)

    rng = np.random.default_rng(0)
    cases = []
    for n in (50, 300, 2000):
        pts = rng.uniform(0, 1920, (n, 2))
        cases.append((f"max_pairwise_distance n={n}", "max_pairwise_distance", (pts,)))
    for n in (1_000, 100_000):
        x = np.sort(rng.random((n, 2)), axis=1)
        y = np.sort(rng.random((n, 2)), axis=1)
        a = np.ascontiguousarray(np.column_stack([x[:, 0], y[:, 0], x[:, 1], y[:, 1]]))
        b = np.ascontiguousarray(a[::-1])
        cases.append((f"box_iou_pairs n={n}", "box_iou_pairs", (a, b)))
        iv = np.ascontiguousarray(np.sort(rng.uniform(0, 600, (n, 2)), axis=1))
        cases.append((f"interval_iou_pairs n={n}", "interval_iou_pairs", (iv, np.ascontiguousarray(iv[::-1]))))

    print(f"{'kernel':34s} {'numpy':>12s} {'cython':>12s} {'speedup':>8s}")
    for label, name, fargs in cases:
        py = best(lambda: getattr(_kernels_py, name)(*fargs), args.repeat, 3)
        line = f"{label:34s} {py * 1e3:10.3f}ms"
        if compiled is not None:
            cy = best(lambda: getattr(compiled, name)(*fargs), args.repeat, 3)
            line += f" {cy * 1e3:10.3f}ms {py / cy:7.1f}x"
        print(line)

    tests = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "tests")
    print("\nfiltering 300 clips of up to 300 frames:")
    for env in ({"EGOKIT_PURE_PYTHON": "1"}, {}):
        proc = subprocess.run(
            [sys.executable, "-c", FILTER_SNIPPET.format(tests=tests)],
            capture_output=True, text=True, env={**os.environ, **env},
        )
        backend, secs = proc.stdout.split()
        print(f"  {backend:8s} {float(secs):.3f}s")


if __name__ == "__main__":
    main()
