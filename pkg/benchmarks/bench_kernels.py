"""Time the compiled graph kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--nodes 150] [--repeat 3]

Both backends are checked for identical output before timing.
"""

import argparse
import timeit

import numpy as np

from lorentz import data, kernels


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=150)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if kernels.BACKEND != "cython":
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")

    g = data.generate_disease_tree(args.nodes, seed=0)
    rng = np.random.default_rng(0)
    extra = rng.integers(0, args.nodes, size=(args.nodes // 4, 2))
    edges = np.concatenate([g.edges, extra[extra[:, 0] != extra[:, 1]]])
    indptr, indices = data.csr(args.nodes, edges)
    D = kernels.all_pairs_bfs(indptr, indices, args.nodes, backend="python")

    jobs = {
        "all_pairs_bfs": lambda b: kernels.all_pairs_bfs(indptr, indices, args.nodes, backend=b),
        "delta_exact": lambda b: kernels.delta_exact(D, backend=b),
    }
    print(f"graph: n={args.nodes}, m={len(edges)}; best of {args.repeat}")
    print(f"{'kernel':<16}{'python (s)':>12}{'cython (s)':>12}{'speedup':>10}")
    for name, job in jobs.items():
        assert np.array_equal(np.asarray(job("python")), np.asarray(job("cython"))), name
        py = min(timeit.repeat(lambda: job("python"), number=1, repeat=args.repeat))
        cy = min(timeit.repeat(lambda: job("cython"), number=1, repeat=args.repeat))
        print(f"{name:<16}{py:>12.4f}{cy:>12.4f}{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()
