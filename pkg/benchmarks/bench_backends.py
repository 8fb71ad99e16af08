#!/usr/bin/env python3
"""Compare the numba kernels against the pure-numpy fallback.

Times three workloads on both backends: raw backward sweeps at a fixed
truncation depth, a full certified solve, and a Monte Carlo batch.  Run
from the repository root:

    python benchmarks/bench_backends.py
"""

import argparse
import time

from ctmdp_reach import (
    Ctmdp,
    GoalSpec,
    Query,
    SimConfig,
    SjsParams,
    generate_sjs,
    gu_solve,
    poisson_weights,
    simulate_scheduler,
    uniformise_late,
)
from ctmdp_reach.kernels import compile_chain, impl

BACKENDS = ("numba", "numpy")


def race_model():
    """Deadline gamble whose optimal action depends on the remaining time;
    the solve needs a dozen rate doublings, which makes it a good kernel
    stress case despite having only three states."""
    model = Ctmdp(
        3,
        ("safe", "rush"),
        (
            (0, 0, 1, 1.0),
            (0, 1, 1, 1.5),
            (0, 1, 2, 1.5),
            (1, 0, 1, 1.0),
            (2, 0, 2, 1.0),
        ),
    )
    return model, GoalSpec(frozenset({1}))


def best_of(repeats, fn):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_sweeps(repeats, depth):
    model, goal = generate_sjs(SjsParams(3, (1.0, 2.0, 3.0, 4.0, 5.0)))
    lam = 12.0
    um = uniformise_late(model, goal, lam)
    chain = compile_chain(um.model, um.goal_states, uniform_rate=lam)
    trunc = poisson_weights(lam * 1.0, depth)
    suffix = trunc.suffix_sums()
    times = {}
    for name in BACKENDS:
        mod = impl(name)

        def run(mod=mod):
            mod.u_sweep(chain.pair_start, chain.pair_action, chain.row_start,
                        chain.col, chain.prob, chain.is_goal, suffix, True)
            mod.v_sweep(chain.pair_start, chain.row_start, chain.col, chain.prob,
                        chain.is_goal, trunc.weights, True)

        run()  # jit warm-up / first-touch
        times[name] = best_of(repeats, run)
    return f"backward sweeps (32 states, depth {depth})", times


def bench_solver(repeats):
    model, goal = race_model()
    query = Query(time_bound=1.0, epsilon=1e-4)
    times = {}
    for name in BACKENDS:
        gu_solve(model, goal, query, backend=name)
        times[name] = best_of(repeats, lambda: gu_solve(model, goal, query, backend=name))
    return "full solve (race model, eps 1e-4)", times


def bench_simulation(repeats, runs):
    model, goal = generate_sjs(SjsParams(2, (1.0, 2.0, 3.0)))
    query = Query(time_bound=1.0, epsilon=1e-3)
    _, sched = gu_solve(model, goal, query)
    um = uniformise_late(model, goal, sched.lam)
    cfg = SimConfig(runs=runs, seed=1, time_bound=1.0)
    times = {}
    for name in BACKENDS:
        simulate_scheduler(um, sched, cfg, backend=name)
        times[name] = best_of(
            repeats, lambda: simulate_scheduler(um, sched, cfg, backend=name)
        )
    return f"simulation ({runs} trajectories)", times


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--depth", type=int, default=20000)
    parser.add_argument("--runs", type=int, default=100000)
    args = parser.parse_args()

    rows = [
        bench_sweeps(args.repeats, args.depth),
        bench_solver(args.repeats),
        bench_simulation(args.repeats, args.runs),
    ]
    width = max(len(label) for label, _ in rows)
    print(f"{'workload':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for label, times in rows:
        ratio = times["numpy"] / times["numba"]
        print(f"{label:<{width}}  {times['numba']:>9.4f}s  {times['numpy']:>9.4f}s  {ratio:>7.1f}x")


if __name__ == "__main__":
    main()
