"""Monte Carlo estimation of time-bounded reachability.

simulate_scheduler drives the uniformised model under a step-indexed
decision table.  Counting jumps of the uniform chain is exactly the
memory a step-counting policy needs, so this walk realises the table's
behaviour on the original model as well; its estimate validates the
solver's certified bounds end to end.

simulate_baseline walks the original model directly under a memoryless
policy (uniform-random or a fixed per-state action table) as an
independent sanity oracle.

All randomness comes from xoshiro256** with one substream per trajectory
index, so a given (seed, runs) configuration reproduces the same outcome
regardless of execution order; see the kernel backends.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import Ctmdp, GoalSpec, validate
from .solver import StepScheduler
from .uniformise import UniformisedModel

__all__ = ["SimConfig", "SimOutcome", "simulate_scheduler", "simulate_baseline"]

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    """Trajectory count, seed, horizon, and confidence level."""

    runs: int
    seed: int
    time_bound: float
    confidence: float = 0.99

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError(f"runs must be at least 1, got {self.runs}")
        if not (0.0 < self.confidence < 1.0):
            raise ValueError(f"confidence must lie in (0,1), got {self.confidence}")
        if not (self.time_bound > 0 and math.isfinite(self.time_bound)):
            raise ValueError(f"time_bound must be positive and finite, got {self.time_bound}")


@dataclass(frozen=True)
class SimOutcome:
    """Success fraction with a normal-approximation confidence interval."""

    estimate: float
    half_width: float
    runs: int
    seed: int


def _outcome(successes: int, cfg: SimConfig) -> SimOutcome:
    p = successes / cfg.runs
    z = statistics.NormalDist().inv_cdf(0.5 + cfg.confidence / 2.0)
    half = z * math.sqrt(max(p * (1.0 - p), 0.0) / cfg.runs)
    return SimOutcome(estimate=p, half_width=half, runs=cfg.runs, seed=cfg.seed)


def simulate_scheduler(
    um: UniformisedModel,
    sched: StepScheduler,
    cfg: SimConfig,
    initial_state: int = 0,
    backend: str | None = None,
) -> SimOutcome:
    """Estimate goal probability of the uniform chain under a decision table.

    Each trajectory starts at the entry state of initial_state, draws
    exponential(lambda) sojourns, follows decision(state, jump count)
    and the tail action past the table depth, and succeeds when it enters
    a goal state with accumulated time at most the bound.
    """
    if sched.lam != um.lam or sched.variant != um.variant:
        raise ValueError(
            f"mismatched scheduler: variant={sched.variant} lambda={sched.lam} "
            f"vs model variant={um.variant} lambda={um.lam}"
        )
    if sched.decision.shape[1] != um.model.num_states:
        raise ValueError(
            f"scheduler covers {sched.decision.shape[1]} states, "
            f"model has {um.model.num_states}"
        )
    if not (0 <= initial_state < um.num_original_states):
        raise ValueError(f"initial state {initial_state} out of range")

    chain = kernels.compile_chain(um.model, um.goal_states, uniform_rate=um.lam)
    entry = int(um.entry_state_of[initial_state])
    imp = kernels.impl(backend)
    successes = imp.walk_scheduler(
        chain.pair_start, chain.row_start, chain.col, chain.prob,
        chain.is_goal, chain.pair_of,
        um.lam, cfg.time_bound, sched.decision, sched.tail_action,
        entry, cfg.runs, np.uint64(cfg.seed & _SEED_MASK),
    )
    return _outcome(int(successes), cfg)


def simulate_baseline(
    model: Ctmdp,
    goal: GoalSpec,
    policy,
    cfg: SimConfig,
    initial_state: int = 0,
    backend: str | None = None,
) -> SimOutcome:
    """Estimate goal probability of the original model under a simple policy.

    policy is either the string "uniform-random" (each state entry picks
    an enabled action uniformly) or a full state -> action index table
    (sequence or dict) whose entries must all be enabled.  Sojourns are
    exponential in the chosen action's exit rate.
    """
    violations = validate(model)
    if violations:
        raise ValueError("invalid model: " + "; ".join(violations))
    if not (0 <= initial_state < model.num_states):
        raise ValueError(f"initial state {initial_state} out of range")

    chain = kernels.compile_chain(model, goal.goal_states)
    n = model.num_states
    if isinstance(policy, str):
        if policy not in ("uniform-random", "uniform"):
            raise ValueError(f"unknown policy {policy!r}")
        uniform = True
        table = np.zeros(n, dtype=np.int32)
    else:
        uniform = False
        if isinstance(policy, dict):
            table = np.array([policy[s] for s in range(n)], dtype=np.int32)
        else:
            table = np.asarray(policy, dtype=np.int32)
        if table.shape != (n,):
            raise ValueError(f"policy table must give one action per state ({n})")
        n_actions = len(model.actions)
        for s in range(n):
            a = int(table[s])
            if not (0 <= a < n_actions) or chain.pair_of[s, a] < 0:
                raise ValueError(f"action not enabled: policy picks action {a} in state {s}")

    imp = kernels.impl(backend)
    successes = imp.walk_baseline(
        chain.pair_start, chain.pair_exit, chain.row_start, chain.col,
        chain.prob, chain.is_goal, chain.pair_of,
        cfg.time_bound, uniform, table, initial_state, cfg.runs,
        np.uint64(cfg.seed & _SEED_MASK),
    )
    return _outcome(int(successes), cfg)
