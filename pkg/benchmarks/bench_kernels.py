"""Compare the compiled coordinate-descent kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--radius 5] [--repeat 3]

Each case runs the same problem through both backends, checks that the
answers agree and prints the best-of-N wall time and the speed-up.
"""

import argparse
import time

import numpy as np

from pharmonic import _backend
from pharmonic.periodic_finite import random_coset_resistances, solve_periodic
from pharmonic.plaplace import ball_csr, dirichlet_solve, random_edge_resistance
from pharmonic.subgroup import FiniteIndex, quotient_graph
from pharmonic.word_group import ReducedWord, ball


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def dirichlet_case(radius, p):
    b = ball(ReducedWord.identity(2), radius)
    rng = np.random.default_rng(radius)
    boundary = {v: float(rng.uniform(-1, 1)) for v in b.boundary}
    r = random_edge_resistance(1)

    def run(backend):
        sol = dirichlet_solve(b, boundary, r, p, tol=1e-10, backend=backend)
        return np.array([sol.values[v] for v in b.vertices])

    return f"dirichlet k=2 R={radius} p={p:g} ({len(b)} vertices)", run


def periodic_case(starts):
    q = quotient_graph(FiniteIndex.of([[1], [2], [3]], 3))
    r = random_coset_resistances(q, np.random.default_rng(0))
    pts = np.random.default_rng(1).uniform(-1, 1, (starts, q.size))

    def run(backend):
        return np.array([solve_periodic(q, r, 1.5, s, backend=backend).values for s in pts])

    return f"periodic index 8 p=1.5 x{starts} starts", run


def residual_case(radius):
    b = ball(ReducedWord.identity(3), radius)
    indptr, indices, weights = ball_csr(b, random_edge_resistance(2), 2.7)
    values = np.random.default_rng(2).uniform(-1, 1, len(b))

    def run(backend):
        return _backend.get(backend).vertex_residuals(indptr, indices, weights, values, 2.7)

    return f"residuals k=3 R={radius} ({len(b)} vertices)", run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--radius", type=int, default=5)
    ap.add_argument("--starts", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    try:
        _backend.get("compiled")
    except ImportError:
        raise SystemExit("compiled kernels are not built; reinstall with a C compiler available")

    cases = [
        dirichlet_case(args.radius, 3.0),
        dirichlet_case(args.radius, 1.5),
        periodic_case(args.starts),
        residual_case(args.radius + 1),
    ]
    print(f"{'case':<44}{'compiled':>12}{'python':>12}{'speed-up':>10}")
    for name, run in cases:
        tc, a = best_of(lambda: run("compiled"), args.repeat)
        tp, b = best_of(lambda: run("python"), args.repeat)
        agree = np.allclose(a, b, rtol=0, atol=1e-10)
        print(f"{name:<44}{tc * 1e3:>10.1f}ms{tp * 1e3:>10.1f}ms{tp / tc:>9.0f}x{'' if agree else '  MISMATCH'}")


if __name__ == "__main__":
    main()
