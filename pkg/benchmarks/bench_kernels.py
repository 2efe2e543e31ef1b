"""Time the compiled and pure-Python diameter/betweenness kernels side by side.

    python benchmarks/bench_kernels.py [--sizes 100 400 1600] [--repeat 3]

Each size is a random sparse graph with roughly the degree profile of a
program graph (average degree about 3).  Results from the two backends are
compared before any timing is reported.
"""

from __future__ import annotations

import argparse
import math
import random
import sys
import timeit

from codegraphs import kernels


def sparse_graph(n: int, seed: int) -> list[tuple[int, int]]:
    rng = random.Random(seed)
    # spanning tree first so the graph is connected, then a few chords
    pairs = [(rng.randrange(v), v) for v in range(1, n)]
    pairs += [(rng.randrange(n), rng.randrange(n)) for _ in range(n // 2)]
    return pairs


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[100, 400, 1600])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    if kernels.compiled_brandes is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`",
              file=sys.stderr)
        return 1

    print(f"{'nodes':>7} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for n in args.sizes:
        indptr, indices = kernels.csr(n, sparse_graph(n, seed=n))
        py = kernels.brandes(indptr, indices, backend="python")
        cy = kernels.brandes(indptr, indices, backend="cython")
        if py[0] != cy[0] or not all(math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)
                                     for a, b in zip(py[1], cy[1])):
            print(f"backends disagree at n={n}", file=sys.stderr)
            return 1
        t_py = min(timeit.repeat(lambda: kernels.brandes(indptr, indices, backend="python"),
                                 number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: kernels.brandes(indptr, indices, backend="cython"),
                                 number=1, repeat=args.repeat))
        print(f"{n:>7} {t_py:>10.4f} {t_cy:>10.4f} {t_py / t_cy:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
