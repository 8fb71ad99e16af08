"""Certified bounds on optimal time-bounded reachability.

Two untimed analyses run on a uniformised model with truncation depth N:

* the step-indexed optimal backup, whose step-0 vector is achievable by a
  concrete step-counting scheduler (the table returned alongside it), and
* a per-step-count optimal backup whose Poisson-weighted combination
  dominates every timed scheduler because it may optimise each step count
  separately.

For maximisation the first is the certified lower bound and the second
the upper; for minimisation the roles swap (the achievable bound now sits
above the true value).  gu_solve runs both at geometrically increasing
uniformisation rates until the bounds agree within epsilon*(1-kappa),
which certifies the achievable vector to be within epsilon of the value.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import Ctmdp, GoalSpec, Query, max_exit_rate, validate
from .poisson import PoissonTruncation, poisson_weights, truncation_depth
from .uniformise import UniformisedModel, uniformise_early, uniformise_late

__all__ = [
    "StepScheduler",
    "RoundStats",
    "BoundsResult",
    "LambdaCapExceeded",
    "lower_bound",
    "upper_bound",
    "frozen_lower_bound",
    "gu_solve",
    "solve_value_and_policy",
    "result_to_dict",
    "scheduler_to_dict",
]

log = logging.getLogger(__name__)

DEFAULT_CAP_DOUBLINGS = 40
# Depth guards: abort the rate search before the decision table or the
# weight vector stops fitting in memory.
MAX_DEPTH = 10_000_000
MAX_TABLE_CELLS = 400_000_000


@dataclass(frozen=True, eq=False)
class StepScheduler:
    """Deterministic step-indexed decision table for a uniformised model.

    decision[k, s] is the action taken in uniformised state s after k
    jumps, for k < depth; beyond that the per-state tail_action applies.
    Every entry is an enabled action of its state.
    """

    depth: int
    decision: np.ndarray      # int32[depth, n_uniformised]
    tail_action: np.ndarray   # int32[n_uniformised]
    variant: str
    lam: float

    def action_at(self, state: int, step: int) -> int:
        if 0 <= step < self.depth:
            return int(self.decision[step, state])
        return int(self.tail_action[state])


@dataclass(frozen=True)
class RoundStats:
    """Per-round record of the rate search."""

    lam: float
    depth: int
    gap: float
    max_lower_minus_upper: float  # > 0 would violate the bound ordering


@dataclass(frozen=True, eq=False)
class BoundsResult:
    """Certified bounds over the original states plus search statistics."""

    lower: np.ndarray
    upper: np.ndarray
    gap: float
    lambda_used: float
    depth_used: int
    outer_iterations: int
    total_inner_iterations: int
    rounds: tuple[RoundStats, ...]


class LambdaCapExceeded(RuntimeError):
    """Rate search hit its cap; carries the best bounds achieved so far."""

    def __init__(self, message: str, result: BoundsResult, scheduler: StepScheduler):
        super().__init__(message)
        self.result = result
        self.scheduler = scheduler


def _entry_indices(um: UniformisedModel) -> np.ndarray:
    return np.asarray(um.entry_state_of, dtype=np.int64)


def _goal_suffix(trunc: PoissonTruncation) -> np.ndarray:
    return trunc.suffix_sums()


def lower_bound(um, trunc, objective: str = "max", backend: str | None = None):
    """Step-indexed optimal backup; returns (step-0 vector, scheduler).

    The vector is restricted to entry states of the original model.  For
    objective "min" the same recursion runs with minimising backups; the
    result is then an upper bound on the minimal value (see gu_solve).
    """
    chain = kernels.compile_chain(um.model, um.goal_states, uniform_rate=um.lam)
    imp = kernels.impl(backend)
    u0, decisions = imp.u_sweep(
        chain.pair_start, chain.pair_action, chain.row_start,
        chain.col, chain.prob, chain.is_goal,
        _goal_suffix(trunc), objective == "max",
    )
    tail = decisions[trunc.depth - 1].copy()
    sched = StepScheduler(trunc.depth, decisions, tail, um.variant, um.lam)
    return u0[_entry_indices(um)], sched


def upper_bound(um, trunc, objective: str = "max", backend: str | None = None):
    """Poisson-weighted per-step-count optimal backup at step 0.

    Restricted to entry states.  For objective "min" this becomes the
    lower bound on the minimal value.
    """
    chain = kernels.compile_chain(um.model, um.goal_states, uniform_rate=um.lam)
    imp = kernels.impl(backend)
    v0 = imp.v_sweep(
        chain.pair_start, chain.row_start, chain.col, chain.prob,
        chain.is_goal, trunc.weights, objective == "max",
    )
    return v0[_entry_indices(um)]


def frozen_lower_bound(um, trunc, sched: StepScheduler, backend: str | None = None):
    """Re-run the step-indexed backup with decisions frozen to a table.

    Uses the identical summation as the optimising sweep, so feeding back
    the scheduler extracted by lower_bound reproduces its vector exactly.
    """
    if sched.variant != um.variant or sched.lam != um.lam:
        raise ValueError(
            f"mismatched scheduler: variant={sched.variant} lambda={sched.lam} "
            f"vs model variant={um.variant} lambda={um.lam}"
        )
    if sched.depth != trunc.depth:
        raise ValueError(f"scheduler depth {sched.depth} != truncation depth {trunc.depth}")
    chain = kernels.compile_chain(um.model, um.goal_states, uniform_rate=um.lam)
    n = chain.n_states
    chosen = chain.pair_of[np.arange(n)[None, :], sched.decision]
    if (chosen < 0).any():
        raise ValueError("scheduler decision uses a disabled action")
    imp = kernels.impl(backend)
    u0 = imp.u_sweep_frozen(
        chain.pair_start, chain.pair_action, chain.row_start,
        chain.col, chain.prob, chain.is_goal,
        _goal_suffix(trunc), sched.decision, chain.pair_of,
    )
    return u0[_entry_indices(um)]


def gu_solve(
    model: Ctmdp,
    goal: GoalSpec,
    query: Query,
    lambda_cap_doublings: int = DEFAULT_CAP_DOUBLINGS,
    backend: str | None = None,
):
    """Rate-doubling search for bounds with gap at most epsilon*(1-kappa).

    Returns (BoundsResult, StepScheduler) of the accepted round; the
    reported rate is the one actually used by that round.  The achievable
    vector (lower for max, upper for min) approximates the value within
    epsilon.  Raises LambdaCapExceeded, carrying the best round, if the
    gap never closes within the allowed doublings or the truncation depth
    outgrows the configured guards.
    """
    violations = validate(model)
    if violations:
        raise ValueError("invalid model: " + "; ".join(violations))
    for g in goal.goal_states:
        if not (0 <= g < model.num_states):
            raise ValueError(f"goal state {g} out of range for {model.num_states} states")

    maximize = query.objective == "max"
    delta = query.epsilon * query.kappa
    threshold = query.epsilon * (1.0 - query.kappa)
    uniformiser = uniformise_late if query.variant == "late" else uniformise_early
    lam0 = max_exit_rate(model)
    imp = kernels.impl(backend)

    rounds: list[RoundStats] = []
    total_inner = 0
    best = None
    abort_reason = None

    for j in range(lambda_cap_doublings + 1):
        lam = lam0 * (2.0**j)
        rate_time = lam * query.time_bound
        depth = truncation_depth(rate_time, delta)
        um = uniformiser(model, goal, lam)
        if depth > MAX_DEPTH or depth * um.model.num_states > MAX_TABLE_CELLS:
            abort_reason = f"truncation depth {depth} exceeds the memory guard"
            break
        trunc = poisson_weights(rate_time, depth)
        chain = kernels.compile_chain(um.model, um.goal_states, uniform_rate=lam)
        suffix = trunc.suffix_sums()
        u0_uni, decisions = imp.u_sweep(
            chain.pair_start, chain.pair_action, chain.row_start,
            chain.col, chain.prob, chain.is_goal, suffix, maximize,
        )
        v0_uni = imp.v_sweep(
            chain.pair_start, chain.row_start, chain.col, chain.prob,
            chain.is_goal, trunc.weights, maximize,
        )
        entry = _entry_indices(um)
        achievable = u0_uni[entry]
        prophetic = v0_uni[entry]
        if maximize:
            lower, upper = achievable, prophetic
        else:
            lower, upper = prophetic, achievable
        gap = float(np.max(np.abs(upper - lower)))
        rounds.append(RoundStats(lam, depth, gap, float(np.max(lower - upper))))
        total_inner += depth
        log.debug("round %d: lambda=%g depth=%d gap=%.3e", len(rounds), lam, depth, gap)

        if best is None or gap < best[0]:
            tail = decisions[depth - 1].copy()
            sched = StepScheduler(depth, decisions, tail, um.variant, lam)
            best = (gap, lower, upper, lam, depth, sched)

        if gap <= threshold:
            result = BoundsResult(
                lower=lower, upper=upper, gap=gap, lambda_used=lam,
                depth_used=depth, outer_iterations=len(rounds),
                total_inner_iterations=total_inner, rounds=tuple(rounds),
            )
            tail = decisions[depth - 1].copy()
            return result, StepScheduler(depth, decisions, tail, um.variant, lam)

    if abort_reason is None:
        abort_reason = f"no convergence within {lambda_cap_doublings} rate doublings"
    if best is None:
        raise LambdaCapExceeded(f"lambda cap exceeded: {abort_reason}; no round completed",
                                result=None, scheduler=None)
    gap, lower, upper, lam, depth, sched = best
    result = BoundsResult(
        lower=lower, upper=upper, gap=gap, lambda_used=lam, depth_used=depth,
        outer_iterations=len(rounds), total_inner_iterations=total_inner,
        rounds=tuple(rounds),
    )
    raise LambdaCapExceeded(
        f"lambda cap exceeded: {abort_reason}; best gap {gap:.3e} at lambda {lam}",
        result=result, scheduler=sched,
    )


def result_to_dict(result: BoundsResult, query: Query) -> dict:
    """Result JSON shape with per-state value/lower/upper maps."""
    value = result.lower if query.objective == "max" else result.upper
    as_map = lambda vec: {str(s): float(vec[s]) for s in range(len(vec))}
    return {
        "value": as_map(value),
        "lower": as_map(result.lower),
        "upper": as_map(result.upper),
        "gap": result.gap,
        "lambda": result.lambda_used,
        "depth": result.depth_used,
        "outer_iterations": result.outer_iterations,
        "variant": query.variant,
        "objective": query.objective,
    }


def scheduler_to_dict(sched: StepScheduler) -> dict:
    """Scheduler JSON: tail action per state plus the differing entries."""
    tail = sched.tail_action
    states, steps = np.nonzero(sched.decision.T != tail[:, None])
    return {
        "depth": sched.depth,
        "tail": {str(s): int(tail[s]) for s in range(len(tail))},
        "decisions": [
            [int(s), int(k), int(sched.decision[k, s])]
            for s, k in zip(states, steps)
        ],
    }


def solve_value_and_policy(
    model: Ctmdp,
    goal: GoalSpec,
    query: Query,
    lambda_cap_doublings: int = DEFAULT_CAP_DOUBLINGS,
    backend: str | None = None,
) -> tuple[dict, dict]:
    """Thin wrapper over gu_solve returning serialisable result and policy."""
    result, sched = gu_solve(model, goal, query, lambda_cap_doublings, backend)
    return result_to_dict(result, query), scheduler_to_dict(sched)
