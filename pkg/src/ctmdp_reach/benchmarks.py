"""Scalable CTMDP families for exercising the solver.

The job scheduling family is the interesting one: m processors work on
exponentially distributed jobs, the controller picks which jobs to run,
and the question is the probability of draining the whole set within the
deadline.  States are the subsets of unfinished jobs, so the decision
structure (which jobs to serve first) survives intact while the state
space stays inspectable.

The birth chain family is a pure CTMC whose value has a closed form
(gamma/Erlang CDF), used as a regression oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .model import Ctmdp, GoalSpec

__all__ = ["SjsParams", "generate_sjs", "generate_grid_ctmc"]

DEFAULT_MAX_STATES = 1 << 16


@dataclass(frozen=True)
class SjsParams:
    """Processor count and per-job service rates."""

    processors: int
    jobs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "jobs", tuple(float(r) for r in self.jobs))
        if self.processors < 1:
            raise ValueError(f"need at least one processor, got {self.processors}")
        if not self.jobs:
            raise ValueError("need at least one job")
        for r in self.jobs:
            if not (r > 0 and math.isfinite(r)):
                raise ValueError(f"job rates must be positive and finite, got {r}")


def generate_sjs(p: SjsParams, max_states: int = DEFAULT_MAX_STATES):
    """Preemptive job scheduling CTMDP over subsets of unfinished jobs.

    State index = bitmask of finished jobs, so the initial state (all
    jobs unfinished) is 0 and the goal (everything drained) is the last
    state.  In a state with u unfinished jobs the enabled actions are the
    size-min(m, u) subsets of them; the running jobs complete
    independently at their service rates.  The drained state keeps a
    throwaway self-loop action so every state has something enabled.
    """
    n_jobs = len(p.jobs)
    n_states = 1 << n_jobs
    if n_states > max_states:
        raise ValueError(
            f"state space too large: {n_states} subsets exceeds the limit {max_states}"
        )
    done = n_states - 1

    # Global alphabet: "idle" plus one action per job subset of size <= m,
    # ordered by ascending bitmask.
    run_masks = [
        mask for mask in range(1, n_states)
        if 1 <= mask.bit_count() <= p.processors
    ]
    action_of_mask = {mask: i + 1 for i, mask in enumerate(run_masks)}
    actions = ["idle"] + [
        "run_" + "_".join(str(j) for j in range(n_jobs) if mask >> j & 1)
        for mask in run_masks
    ]

    transitions = [(done, 0, done, 1.0)]  # drained state idles
    for state in range(done):
        unfinished = [j for j in range(n_jobs) if not state >> j & 1]
        k = min(p.processors, len(unfinished))
        for chosen in combinations(unfinished, k):
            mask = 0
            for j in chosen:
                mask |= 1 << j
            a = action_of_mask[mask]
            for j in chosen:
                transitions.append((state, a, state | (1 << j), p.jobs[j]))

    labels = {0: "all_unfinished", done: "done"}
    model = Ctmdp(n_states, tuple(actions), tuple(sorted(transitions)), labels)
    return model, GoalSpec(frozenset({done}))


def generate_grid_ctmc(n: int, rate: float):
    """Birth chain 0 -> 1 -> ... -> n-1 at a common rate, goal = last state.

    Starting from 0, the value at horizon T is the Erlang(n-1, rate) CDF.
    """
    if n < 2:
        raise ValueError(f"need at least 2 states, got {n}")
    if not (rate > 0 and math.isfinite(rate)):
        raise ValueError(f"rate must be positive and finite, got {rate}")
    transitions = [(i, 0, i + 1, rate) for i in range(n - 1)]
    transitions.append((n - 1, 0, n - 1, rate))
    model = Ctmdp(n, ("step",), tuple(transitions), {0: "start", n - 1: "goal"})
    return model, GoalSpec(frozenset({n - 1}))
