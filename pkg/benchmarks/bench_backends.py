"""Compare the compiled Bellman kernel against the pure-numpy fallback.

Runs the exact DP on constant-price instances of growing size with each
backend and prints a small table. Usage:

    python benchmarks/bench_backends.py
"""

from __future__ import annotations

import importlib
import os
import statistics
import sys
import time

import numpy as np


def timed_solve(T: int, N: int, repeats: int = 3) -> float:
    from blocksale import make_instance
    from blocksale import dp

    inst = make_instance(T, N, np.full(T, 100.0))
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        dp.solve_exact(inst)
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def run_backend(pure: bool, sizes) -> dict:
    os.environ.pop("BLOCKSALE_PURE_PYTHON", None)
    if pure:
        os.environ["BLOCKSALE_PURE_PYTHON"] = "1"
    for name in [m for m in list(sys.modules) if m.startswith("blocksale")]:
        del sys.modules[name]
    import blocksale

    importlib.reload(blocksale)
    assert blocksale.USING_COMPILED != pure
    return {size: timed_solve(*size) for size in sizes}


def main():
    sizes = [(10, 1000), (10, 3000), (10, 10000), (100, 2000)]
    compiled = run_backend(pure=False, sizes=sizes)
    fallback = run_backend(pure=True, sizes=sizes)
    print(f"{'T':>6} {'N':>8} {'compiled s':>12} {'fallback s':>12} {'speedup':>9}")
    for size in sizes:
        c, f = compiled[size], fallback[size]
        print(f"{size[0]:>6} {size[1]:>8} {c:>12.4f} {f:>12.4f} {f / c:>8.1f}x")


if __name__ == "__main__":
    main()
