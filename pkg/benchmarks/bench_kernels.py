"""Benchmark the compiled kernels against the pure-Python fallback.

Usage:
    python3 benchmarks/bench_kernels.py [--edges 300] [--vps 500] [--repeat 20]
"""

import argparse
import time

import numpy as np

from vpscape.geometry import Edge
from vpscape.kernels import _impl_py

try:
    from vpscape.kernels import _ext
except ImportError:
    _ext = None


def make_inputs(n_edges, n_vps, seed=0):
    rng = np.random.default_rng(seed)
    edges = [
        Edge.from_points(rng.uniform(0.0, 500.0, size=(int(rng.integers(40, 120)), 2)))
        for _ in range(n_edges)
    ]
    moments = np.array([e.moments for e in edges])
    vps = rng.uniform(-500.0, 1000.0, size=(n_vps, 2))
    angles = rng.uniform(0.0, np.pi, size=n_vps)
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    pixels = np.vstack([e.points for e in edges])
    return moments, vps, dirs, pixels


def bench(label, fn, repeat):
    fn()  # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    per_call = (time.perf_counter() - t0) / repeat
    print(f"  {label:<22} {per_call * 1e3:9.3f} ms/call")
    return per_call


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--edges", type=int, default=300)
    ap.add_argument("--vps", type=int, default=500)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    moments, vps, dirs, pixels = make_inputs(args.edges, args.vps)
    print(f"{args.edges} edges x {args.vps} hypotheses, {pixels.shape[0]} pixels total")

    backends = [("python", _impl_py)]
    if _ext is not None:
        backends.append(("compiled", _ext))
    else:
        print("compiled extension not available; benchmarking fallback only")

    results = {}
    for kernel, call in (
        ("drms_matrix", lambda impl: impl.drms_matrix(moments, vps)),
        ("drms_matrix_ideal", lambda impl: impl.drms_matrix_ideal(moments, dirs)),
        ("strength_sum", lambda impl: impl.strength_sum(pixels, 250.0, 200.0, 100.0)),
    ):
        print(kernel)
        for name, impl in backends:
            results[(kernel, name)] = bench(name, lambda: call(impl), args.repeat)
        if _ext is not None:
            speedup = results[(kernel, "python")] / results[(kernel, "compiled")]
            print(f"  speedup: {speedup:.2f}x")

    if _ext is not None:
        agree = np.array_equal(
            _impl_py.drms_matrix(moments, vps), _ext.drms_matrix(moments, vps)
        )
        print(f"backends bitwise identical: {agree}")


if __name__ == "__main__":
    main()
