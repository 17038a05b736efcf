"""Compare the compiled and pure-Python graph kernels.

    python benchmarks/bench_kernels.py [--nodes 22] [--graphs 20] [--seed 1]

Workloads:
  * max acyclic set on random sparse digraphs (exhaustive branch and bound),
  * max acyclic set on the 12-node side-information graphs for N=K=3 splits,
  * cycle checks for every permutation set with N=K=5 (14400 checks).
"""
import argparse
import random
import time

from codedcache import kernels
from codedcache.combinatorics import distinct_demands
from codedcache.indexcoding import build_graph, permutation_suite, man_split, max_acyclic_bound, uniform_split


def random_graph(rng, n, p):
    rows = []
    for i in range(n):
        row = 0
        for j in range(n):
            if i != j and rng.random() < p:
                row |= 1 << j
        rows.append(row)
    return rows, [rng.randint(1, 50) for _ in range(n)]


def timed(fn):
    start = time.perf_counter()
    result = fn()
    return time.perf_counter() - start, result


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--nodes", type=int, default=22)
    ap.add_argument("--graphs", type=int, default=20)
    ap.add_argument("--density", type=float, default=0.12)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; only the Python backend is available")

    rng = random.Random(args.seed)
    graphs = [random_graph(rng, args.nodes, args.density) for _ in range(args.graphs)]
    ic_graphs = [build_graph(man_split(3, 3, t), d) for t in range(4) for d in distinct_demands(3, 3)]
    ic_graphs += [build_graph(uniform_split(3, 3), d) for d in distinct_demands(3, 3)]

    workloads = {
        f"max acyclic, {args.graphs} random graphs n={args.nodes}":
            lambda b: [kernels.max_acyclic_weight(r, w, backend=b)[0] for r, w in graphs],
        f"max acyclic, {len(ic_graphs)} side-information graphs N=K=3":
            lambda b: [max_acyclic_bound(g, backend=b) for g in ic_graphs],
        "cycle checks, all permutation sets N=K=5":
            lambda b: permutation_suite(5, 5, backend=b).ok,
    }
    print(f"{'workload':58s} " + " ".join(f"{b:>10s}" for b in backends) + "   speedup")
    for name, fn in workloads.items():
        times, results = [], []
        for b in backends:
            t, r = timed(lambda: fn(b))
            times.append(t)
            results.append(r)
        if len(set(map(repr, results))) != 1:
            raise SystemExit(f"backends disagree on {name!r}")
        speed = f"{times[0] / times[-1]:8.1f}x" if len(times) > 1 else ""
        print(f"{name:58s} " + " ".join(f"{t:9.3f}s" for t in times) + f"  {speed}")


if __name__ == "__main__":
    main()
