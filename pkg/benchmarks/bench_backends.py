"""Benchmark the compiled path core against the pure-numpy fallback.

Runs the same seeded batteries through both backends, reports wall times and
the speedup, and asserts the outputs are bit-identical.

    python benchmarks/bench_backends.py [--paths 40000] [--steps 4096]
"""

import argparse
import time

import numpy as np

from memfolio import _backend, model, simulate, strategy


def build_fixture():
    params = model.MemoryParams(p=[0.0, 0.2], q=[0.3, 0.4])
    sigma = np.array([[0.2, 0.0], [0.05, 0.25]])
    mu = 0.02 + sigma @ np.array([0.3, 0.2])
    curves = model.CoefficientCurves.constant(r=0.02, mu=mu, sigma=sigma)
    return params, curves


def bench_wealth(params, curves, paths, steps, backend):
    policy = strategy.solve_stationary(params, curves, model.PowerUtility(0.5))
    config = simulate.PathConfig(horizon=10.0, steps=steps, n_paths=paths, seed=1)
    with _backend.use(backend):
        start = time.perf_counter()
        logx = simulate.collect_log_wealth(
            simulate.simulate_wealth(
                simulate.simulate_noise(params, config), policy, curves, 1.0
            )
        )
        elapsed = time.perf_counter() - start
    return elapsed, logx


def bench_quadratic(paths, steps, backend):
    dyn = simulate.DiagonalDynamics((0.0, 0.05), (-0.5, -1.2), (0.6, 0.4))
    quad = simulate.QuadraticWeights((0.8, 0.3), (0.2, -0.1))
    config = simulate.PathConfig(horizon=2.5, steps=steps, n_paths=paths, seed=2)
    with _backend.use(backend):
        start = time.perf_counter()
        est = simulate.mc_cameron_martin(dyn, quad, 0.0, 2.5, [0.3, -0.2], config)
        elapsed = time.perf_counter() - start
    return elapsed, est.value


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--paths", type=int, default=40000)
    parser.add_argument("--steps", type=int, default=4096)
    args = parser.parse_args()

    try:
        with _backend.use("cython"):
            pass
    except ImportError:
        raise SystemExit("compiled backend not built; run pip install -e . first")

    params, curves = build_fixture()
    print(f"battery: {args.paths} paths x {args.steps} steps, 2 assets")
    print(f"{'kernel':<22} {'cython':>10} {'python':>10} {'speedup':>9}  identical")

    t_fast, out_fast = bench_wealth(params, curves, args.paths, args.steps, "cython")
    t_slow, out_slow = bench_wealth(params, curves, args.paths, args.steps, "python")
    same = np.array_equal(out_fast, out_slow)
    print(f"{'noise+wealth stepping':<22} {t_fast:>9.2f}s {t_slow:>9.2f}s "
          f"{t_slow / t_fast:>8.2f}x  {same}")

    t_fast, v_fast = bench_quadratic(args.paths, args.steps, "cython")
    t_slow, v_slow = bench_quadratic(args.paths, args.steps, "python")
    print(f"{'quadratic functional':<22} {t_fast:>9.2f}s {t_slow:>9.2f}s "
          f"{t_slow / t_fast:>8.2f}x  {v_fast == v_slow}")

    if not same:
        raise SystemExit("backends disagree; investigate before trusting results")


if __name__ == "__main__":
    main()
