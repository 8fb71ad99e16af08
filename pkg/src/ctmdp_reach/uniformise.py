"""Late and early uniformisation of a CTMDP to a common exit rate.

Late uniformisation keeps the state space and pads every (state, action)
pair with a self-loop up to the target rate; a late scheduler may revise
its choice whenever such a padding loop fires.

Early uniformisation must not hand out that revision opportunity, so it
adds a commitment copy (s, a) per state and enabled action: choosing a in
the entry state (s, _) either jumps like the original model or freezes
into (s, a), where only a remains enabled.  Copies that can never be
entered (padding rate zero) are not materialised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import Ctmdp, GoalSpec, grouped_transitions, max_exit_rate

__all__ = ["UniformisedModel", "uniformise_late", "uniformise_early"]


@dataclass(frozen=True)
class UniformisedModel:
    """A CTMDP whose every (state, action) exit rate equals `lam`."""

    model: Ctmdp
    lam: float
    variant: str
    origin_of: tuple[int, ...]        # uniformised state -> original state
    entry_state_of: tuple[int, ...]   # original state -> uniformised entry state
    goal_states: frozenset[int]       # lifted goal set

    @property
    def num_original_states(self) -> int:
        return len(self.entry_state_of)


def _check_rate(lam: float, lam_max: float) -> None:
    if not (math.isfinite(lam) and lam >= lam_max):
        raise ValueError(
            f"rate below maximal exit rate: lambda={lam} < lambda_max={lam_max}"
        )


def uniformise_late(model: Ctmdp, goal: GoalSpec, lam: float) -> UniformisedModel:
    """Pad every (state, action) with a self-loop so its exit rate is lam.

    The diagonal rate is lam minus the total off-diagonal rate, which
    absorbs any pre-existing self-loop; zero diagonals are not stored.
    """
    _check_rate(lam, max_exit_rate(model))
    groups = grouped_transitions(model)
    transitions: list[tuple[int, int, int, float]] = []
    for (s, a), row in sorted(groups.items()):
        off_sum = math.fsum(r for t, r in row if t != s)
        diag = lam - off_sum
        for t, r in row:
            if t == s:
                continue
            transitions.append((s, a, t, r))
        if diag > 0.0:
            transitions.append((s, a, s, diag))
    n = model.num_states
    uni = Ctmdp(n, model.actions, tuple(sorted(transitions)), dict(model.state_labels))
    identity = tuple(range(n))
    return UniformisedModel(
        model=uni,
        lam=lam,
        variant="late",
        origin_of=identity,
        entry_state_of=identity,
        goal_states=frozenset(goal.goal_states),
    )


def uniformise_early(model: Ctmdp, goal: GoalSpec, lam: float) -> UniformisedModel:
    """Build the commitment-copy uniformisation for early schedulers.

    State layout: entry states (s, _) keep the original indices 0..n-1;
    reachable copies (s, a) are appended after them.  From an entry state
    or a copy of s, action a jumps to entry states at the original rates
    and freezes into the copy (s, a) at rate lam - E(s, a).  A copy only
    enables its committed action.
    """
    _check_rate(lam, max_exit_rate(model))
    groups = grouped_transitions(model)
    n = model.num_states

    exit_of: dict[tuple[int, int], float] = {
        key: math.fsum(r for _, r in row) for key, row in groups.items()
    }
    # Copies receive probability mass only through their freeze transition,
    # so a pair with freeze rate zero never materialises.
    copy_index: dict[tuple[int, int], int] = {}
    origin = list(range(n))
    for (s, a) in sorted(exit_of):
        if lam - exit_of[(s, a)] > 0.0:
            copy_index[(s, a)] = n + len(copy_index)
            origin.append(s)

    transitions: list[tuple[int, int, int, float]] = []
    for (s, a), row in sorted(groups.items()):
        freeze = lam - exit_of[(s, a)]
        sources = [s]
        if (s, a) in copy_index:
            sources.append(copy_index[(s, a)])
        for src in sources:
            for t, r in row:
                transitions.append((src, a, t, r))
            if freeze > 0.0:
                transitions.append((src, a, copy_index[(s, a)], freeze))

    labels = {s: model.state_labels[s] for s in model.state_labels}
    for (s, a), idx in copy_index.items():
        labels[idx] = f"({model.label(s)},{model.actions[a]})"

    uni = Ctmdp(len(origin), model.actions, tuple(sorted(transitions)), labels)
    lifted = frozenset(
        idx for idx, s in enumerate(origin) if s in goal.goal_states
    )
    return UniformisedModel(
        model=uni,
        lam=lam,
        variant="early",
        origin_of=tuple(origin),
        entry_state_of=tuple(range(n)),
        goal_states=lifted,
    )
