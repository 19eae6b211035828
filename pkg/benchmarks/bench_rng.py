"""Throughput comparison of the compiled and numpy RNG backends.

The two backends are required to be bit-identical; this script asserts that
on a sample and then times raw uniform generation and an end-to-end Monte
Carlo bond price with each backend.

Run:  python3 benchmarks/bench_rng.py
"""

import time

import numpy as np

from qtsm import rng
from qtsm.model import FactorModel, QuadraticRate, TimeGrid
from qtsm.montecarlo import mc_bond

N_PATHS = 20_000
DRAWS = 500


def time_call(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    backends = rng.available_backends()
    print(f"available backends: {backends}")

    sample = {}
    for name in backends:
        rng.set_backend(name)
        sample[name] = rng.uniforms(123, 0, 64, 129)
    if len(backends) == 2:
        assert np.array_equal(sample["cython"], sample["numpy"]), \
            "backends are not bit-identical"
        print("bit-identity check: OK")

    model = FactorModel(A=[[-0.5]], B=[0.025], sigma=[[0.1]], x0=[0.1])
    rate = QuadraticRate(Gamma=[[1.0]], Rvec=[0.02], k=0.0)
    grid = TimeGrid(T=1.0, N=DRAWS)

    n_doubles = N_PATHS * DRAWS
    for name in backends:
        rng.set_backend(name)
        t_uni = time_call(lambda: rng.uniforms(7, 0, N_PATHS, DRAWS))
        t_mc = time_call(lambda: mc_bond(model, rate, N_PATHS, grid, seed=7), repeats=1)
        print(
            f"{name:>7}: uniforms {n_doubles / t_uni / 1e6:8.1f} Mdraws/s"
            f"   mc_bond({N_PATHS} paths x {DRAWS} steps) {t_mc:6.2f} s"
        )
    rng.set_backend(backends[0])


if __name__ == "__main__":
    main()
