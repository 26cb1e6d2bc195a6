"""Compare the numba and numpy kernel backends on every labeled tree of size n.

Run ``python3 benchmarks/bench_kernels.py --n 8``.  The first numba call
includes JIT compilation (or a cache load), so it is timed separately as
warmup and excluded from the steady-state figures.
"""

import argparse
import time

import numpy as np

from treeprobe.kernels import get_backend
from treeprobe.nonadaptive import build_reconstruction_query_graph
from treeprobe.trees import prufer_sequences


def _stages(kernels, seqs, n, queried, missing):
    child, parent = kernels.prufer_decode_batch(seqs, n)
    dist = np.zeros((seqs.shape[0], n, n), dtype=np.int8)
    kernels.distances_from_order(child, parent, dist)
    bad = kernels.four_point_violations(dist)
    adj, status = kernels.decode_matching_batch(dist.astype(np.int32), queried, missing)
    return dist, bad, adj, status


def time_backend(name, seqs, n, repeat):
    kernels = get_backend(name)
    spec = build_reconstruction_query_graph(n)
    queried = spec.queried_mask()
    missing = np.array(sorted(spec.missing), dtype=np.int64)
    t0 = time.perf_counter()
    out = _stages(kernels, seqs[:8], n, queried, missing)
    warmup = time.perf_counter() - t0

    child, parent = kernels.prufer_decode_batch(seqs, n)
    dist = np.zeros((seqs.shape[0], n, n), dtype=np.int8)
    timings = {"decode": [], "distances": [], "four_point": [], "matching_decoder": []}
    for _ in range(repeat):
        t = time.perf_counter()
        child, parent = kernels.prufer_decode_batch(seqs, n)
        timings["decode"].append(time.perf_counter() - t)
        t = time.perf_counter()
        kernels.distances_from_order(child, parent, dist)
        timings["distances"].append(time.perf_counter() - t)
        t = time.perf_counter()
        bad = kernels.four_point_violations(dist)
        timings["four_point"].append(time.perf_counter() - t)
        d32 = dist.astype(np.int32)
        t = time.perf_counter()
        adj, status = kernels.decode_matching_batch(d32, queried, missing)
        timings["matching_decoder"].append(time.perf_counter() - t)
    out = (dist.copy(), bad, adj, status)
    return warmup, {k: min(v) for k, v in timings.items()}, out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=8)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    seqs = prufer_sequences(args.n)
    print(f"n={args.n}: {seqs.shape[0]} labeled trees, best of {args.repeat}")
    results = {}
    for name in ("numba", "numpy"):
        warmup, best, out = time_backend(name, seqs, args.n, args.repeat)
        results[name] = (best, out)
        print(f"  {name:<6} warmup {warmup:8.3f}s")

    print(f"  {'stage':<18}{'numba s':>10}{'numpy s':>10}{'speedup':>10}")
    for stage in results["numba"][0]:
        a, b = results["numba"][0][stage], results["numpy"][0][stage]
        print(f"  {stage:<18}{a:10.4f}{b:10.4f}{b / a:10.1f}x")

    same = all(np.array_equal(x, y) for x, y in zip(results["numba"][1], results["numpy"][1]))
    print(f"  outputs identical: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    raise SystemExit(main())
