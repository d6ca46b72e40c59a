"""Benchmark: compiled refinement kernel vs the pure-Python twin.

Measures the raw refine() call on fixed adjacency structures and the
end-to-end certificate workloads that dominate pipeline runtime.  Both
backends run in one process by swapping the kernel module used by the
canonical-labeling driver; outputs are cross-checked for equality while
timing.

Usage: python benchmarks/bench_refine.py [--repeat N]
"""

import argparse
import time

import numpy as np

from stoqsym import canon, _refine_py
from stoqsym.effective import Pipeline
from stoqsym.instances import h010, hamming_symmetric, random_stoquastic
from stoqsym.model import Hamiltonian

try:
    from stoqsym import _refine as _refine_compiled
except ImportError:
    _refine_compiled = None


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_raw_refine(kernel, repeat):
    rng = np.random.Generator(np.random.Philox(1))
    n = 96
    heads, flats = [], []
    for _ in range(3):
        lists = [
            sorted(int(x) for x in rng.choice(n, size=6, replace=False))
            for _ in range(n)
        ]
        head, flat = [0], []
        for row in lists:
            flat.extend(row)
            head.append(len(flat))
        heads.append(head)
        flats.append(flat)
    graph = kernel.make_graph(n, heads, flats)
    colors = [int(x) for x in rng.integers(0, 4, size=n)]

    def run():
        out = None
        for _ in range(200):
            out = kernel.refine(graph, colors)
        return out

    return _time(run, repeat)


def bench_pipeline(make_ham, seed, repeat):
    def run():
        ham = make_ham()
        pipe = Pipeline(ham)
        eg = pipe.effective_graph(seed)
        return (eg.reps, eg.class_sizes, eg.visited_count)

    return _time(run, repeat)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if _refine_compiled is None:
        print("compiled kernel not built; run pip install -e . first")
        return

    rng = np.random.Generator(np.random.Philox(77))
    random_ham_text = random_stoquastic(rng, n_range=(8, 8))
    workloads = [
        ("worked example (n=3)", h010, 0b001),
        ("hamming n=10", lambda: hamming_symmetric(10), 0),
        ("hamming n=14", lambda: hamming_symmetric(14), 0),
        ("random n=8", lambda: random_ham_text, 0),
    ]

    print(f"{'workload':28s} {'compiled':>12s} {'pure':>12s} {'speedup':>9s}")
    name = "raw refine x200 (96 vtx)"
    t_compiled, out_c = bench_raw_refine(_refine_compiled, args.repeat)
    t_pure, out_p = bench_raw_refine(_refine_py, args.repeat)
    assert out_c == out_p, "kernel outputs diverge"
    print(f"{name:28s} {t_compiled*1e3:10.2f}ms {t_pure*1e3:10.2f}ms {t_pure/t_compiled:8.1f}x")

    for name, make_ham, seed in workloads:
        canon._kernel = _refine_compiled
        t_compiled, out_c = bench_pipeline(make_ham, seed, args.repeat)
        canon._kernel = _refine_py
        t_pure, out_p = bench_pipeline(make_ham, seed, args.repeat)
        canon._kernel = _refine_compiled
        assert out_c == out_p, f"backends disagree on {name}"
        print(
            f"{name:28s} {t_compiled*1e3:10.2f}ms {t_pure*1e3:10.2f}ms"
            f" {t_pure/t_compiled:8.1f}x"
        )


if __name__ == "__main__":
    main()
