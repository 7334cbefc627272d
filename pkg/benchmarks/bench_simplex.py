"""Compare the compiled and pure-Python simplex pivot kernels.

Builds LP relaxations of generated instances of growing size, solves each
with both kernels, checks they agree, and prints a timing table.

Run:  python benchmarks/bench_simplex.py
"""

import time

import netdes_cuts.simplex as simplex
from netdes_cuts.engine import generate_instance
from netdes_cuts.lp import build_relaxation, solve
from netdes_cuts.simplex import _pivot_py

try:
    from netdes_cuts.simplex import _pivot_cy
except ImportError:
    _pivot_cy = None


def models():
    for nodes, density, seed in [(4, 0.5, 1), (5, 0.6, 2), (6, 0.7, 3), (8, 0.6, 4), (10, 0.5, 5)]:
        inst = generate_instance(seed=seed, nodes=nodes, density=density, facilities=(1, 3))
        model = build_relaxation(inst)
        yield f"{nodes}n/{len(inst.arcs)}a", model


def time_kernel(kernel, model, repeats=5):
    simplex.pivot_loop = kernel
    best = float("inf")
    value = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        sol = solve(model)
        best = min(best, time.perf_counter() - t0)
        value = sol.objective
    return best, value


def main():
    if _pivot_cy is None:
        print("compiled kernel unavailable; build it with pip install -e .")
        return
    print(f"{'model':>10} {'python':>12} {'cython':>12} {'speedup':>9}")
    for name, model in models():
        t_py, v_py = time_kernel(_pivot_py.pivot_loop, model)
        t_cy, v_cy = time_kernel(_pivot_cy.pivot_loop, model)
        assert abs(v_py - v_cy) < 1e-6, (v_py, v_cy)
        print(f"{name:>10} {t_py * 1e3:>10.2f}ms {t_cy * 1e3:>10.2f}ms {t_py / t_cy:>8.1f}x")
    simplex.pivot_loop = _pivot_cy.pivot_loop


if __name__ == "__main__":
    main()
