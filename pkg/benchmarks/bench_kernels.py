"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from linkpc import _kernels_py

try:
    from linkpc import _kernels
except ImportError:
    _kernels = None


def cases(n_nodes=400, window=10, seed=0):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(0, 400, n_nodes)
    ys = rng.uniform(0, 400, n_nodes)
    ii, jj = _kernels_py.unit_disk_edges(xs, ys, 30.0)
    src = np.concatenate([ii, jj]).astype(np.int64)
    dst = np.concatenate([jj, ii]).astype(np.int64)
    m = len(src)
    p = rng.uniform(0.6, 1.0, m)
    draws = rng.random(m)

    def edges(mod):
        return lambda: mod.unit_disk_edges(xs, ys, 30.0)

    def probes(mod):
        hist = np.zeros((m, window), dtype=np.uint8)
        e_res = np.full(n_nodes, np.inf)
        spent = np.zeros(n_nodes)
        alive = np.ones(n_nodes, dtype=np.uint8)
        sent = np.zeros(n_nodes, dtype=np.uint8)
        ratios = np.zeros(m)

        def go():
            for slot in range(window):
                mod.probe_round(src, dst, p, draws, hist, slot, e_res, spent, alive, 1e-5, 1e-5, sent)
            mod.window_ratios(hist, window, ratios)
        return go

    def deliver(mod):
        nb = dst[:32].copy()
        pp = p[:32].copy()
        dr = draws[:32].copy()
        e_res = np.full(n_nodes, np.inf)
        spent = np.zeros(n_nodes)
        alive = np.ones(n_nodes, dtype=np.uint8)
        out = np.zeros(32, dtype=np.uint8)
        return lambda: [mod.deliver(nb, pp, dr, e_res, spent, alive, 5e-5, out) for _ in range(100)]

    return {"unit_disk_edges": edges, f"probe_round x{window}": probes, "deliver x100": deliver}, n_nodes, m


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--nodes", type=int, default=400)
    args = ap.parse_args()
    table, n, m = cases(args.nodes)
    print(f"{n} nodes, {m} directed links")
    print(f"{'kernel':<22}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, make in table.items():
        t_py = min(timeit.repeat(make(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if _kernels is None:
            print(f"{name:<22}{t_py:>12.3f}{'n/a':>12}{'':>10}")
            continue
        t_cy = min(timeit.repeat(make(_kernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<22}{t_py:>12.3f}{t_cy:>12.3f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
