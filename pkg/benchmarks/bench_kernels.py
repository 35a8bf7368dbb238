"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Each kernel runs the same inputs on both backends; outputs are compared
before timings are reported.
"""
import argparse
import json
import time

import numpy as np

from dyadic import _backend, chains as ch
from dyadic.enumeration import flip_graph
from dyadic.tiling import VERTICAL, strips


def _table_walk(kern, steps):
    table = np.ascontiguousarray(ch.move_table("edge", 4))
    draws = ch.make_rng(0).integers(0, table.shape[1], steps, dtype=np.int64)
    counts = np.zeros(table.shape[0], dtype=np.int64)
    return lambda: (kern.table_walk(table, np.int32(0), draws, None, counts), counts.copy())


def _grid_walk(kern, steps):
    draws = ch.make_rng(0).integers(0, 4 << 8, steps, dtype=np.int64)
    start = strips(8, VERTICAL)

    def run():
        g = ch.GridState(start)
        g.walk(draws, None, kern)
        return g.to_tiling().encode()
    return run


def _power_iterate(kern, _):
    M = ch.build_edge_matrix(3).to_csr(shifted=True)
    x0 = ch.make_rng(0).standard_normal(M.shape[0])
    x0 -= x0.mean()
    args = (M.indptr.astype(np.int64), M.indices.astype(np.int32), M.data.astype(np.float64))
    return lambda: kern.power_iterate(*args, x0 / np.linalg.norm(x0), 20000, 1e-12, 100, 1)[:2]


def _eccentricities(kern, _):
    m = flip_graph(3).csr()
    ip, ix = m.indptr.astype(np.int64), m.indices.astype(np.int32)
    return lambda: kern.eccentricities(ip, ix, 1).tolist()


KERNELS = {
    "table_walk (k=4 edge, 2e5 steps)": (_table_walk, 200_000),
    "grid_walk (k=8 edge, 5e4 steps)": (_grid_walk, 50_000),
    "power_iterate (k=3 edge)": (_power_iterate, None),
    "eccentricities (k=3 flip graph)": (_eccentricities, None),
}


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    if isinstance(a, float):
        return abs(a - b) < 1e-12
    return a == b


def bench(repeat=3):
    cy, py = _backend.load("cython"), _backend.load("python")
    rows = []
    for name, (make, size) in KERNELS.items():
        fc, fp = make(cy, size), make(py, size)
        rc, rp = fc(), fp()
        times = {}
        for label, fn in (("cython", fc), ("python", fp)):
            best = float("inf")
            for _ in range(repeat):
                t0 = time.perf_counter()
                fn()
                best = min(best, time.perf_counter() - t0)
            times[label] = best
        rows.append({"kernel": name, "cython_s": times["cython"], "python_s": times["python"],
                     "speedup": times["python"] / times["cython"], "outputs_match": bool(_same(rc, rp))})
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json")
    a = ap.parse_args()
    rows = bench(a.repeat)
    print(f"{'kernel':38s} {'cython':>10s} {'python':>10s} {'speedup':>9s}  match")
    for r in rows:
        print(f"{r['kernel']:38s} {r['cython_s']:10.4f} {r['python_s']:10.4f} {r['speedup']:9.1f}  {r['outputs_match']}")
    if a.json:
        with open(a.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
