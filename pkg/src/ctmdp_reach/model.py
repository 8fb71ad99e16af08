"""CTMDP data model, validation, and derived quantities.

A model is a finite set of states, a global action alphabet, and a set of
rate triples (source, action, target, rate).  An action is enabled in a
state iff it has at least one outgoing triple there; every state must have
at least one enabled action.  A CTMC is simply a model where every state
enables exactly one action.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

__all__ = [
    "Ctmdp",
    "GoalSpec",
    "Query",
    "ModelFormatError",
    "validate",
    "enabled_actions",
    "exit_rate",
    "embedded_prob",
    "max_exit_rate",
    "parse_model",
    "load_model",
    "model_to_dict",
    "dump_model",
    "parse_goal",
    "load_goal",
]

VARIANTS = ("late", "early")
OBJECTIVES = ("max", "min")


class ModelFormatError(ValueError):
    """Raised when a model or goal file does not match the expected schema."""


@dataclass(frozen=True)
class Ctmdp:
    """Finite CTMDP with dense integer states and a global action list.

    Transitions are (source, action index, target, rate) tuples with
    strictly positive rates; zero-rate triples are never stored.
    Instances are immutable and safe to share between threads.
    """

    num_states: int
    actions: tuple[str, ...]
    transitions: tuple[tuple[int, int, int, float], ...]
    state_labels: dict[int, str] = field(default_factory=dict)

    def label(self, s: int) -> str:
        return self.state_labels.get(s, str(s))


@dataclass(frozen=True)
class GoalSpec:
    """Set of goal states to be reached."""

    goal_states: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "goal_states", frozenset(self.goal_states))


@dataclass(frozen=True)
class Query:
    """Reachability query: time bound, scheduler variant, objective, precision.

    epsilon is the overall approximation error target; kappa splits it
    between sum truncation (epsilon*kappa) and the bound gap
    (epsilon*(1-kappa)).
    """

    time_bound: float
    variant: str = "late"
    objective: str = "max"
    epsilon: float = 1e-6
    kappa: float = 0.1

    def __post_init__(self):
        if not (self.time_bound > 0 and math.isfinite(self.time_bound)):
            raise ValueError(f"time_bound must be positive and finite, got {self.time_bound}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}")
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError(f"epsilon must lie in (0,1), got {self.epsilon}")
        if not (0.0 < self.kappa < 1.0):
            raise ValueError(f"kappa must lie in (0,1), got {self.kappa}")


def grouped_transitions(model: Ctmdp) -> dict[tuple[int, int], list[tuple[int, float]]]:
    """Group triples by (source, action), targets sorted ascending."""
    groups: dict[tuple[int, int], list[tuple[int, float]]] = {}
    for s, a, t, r in model.transitions:
        groups.setdefault((s, a), []).append((t, r))
    for row in groups.values():
        row.sort(key=lambda tr: tr[0])
    return groups


def enabled_actions(model: Ctmdp, s: int) -> list[int]:
    """Action indices enabled in state s, ascending."""
    seen = {a for (src, a, _, _) in model.transitions if src == s}
    return sorted(seen)


def validate(model: Ctmdp) -> list[str]:
    """Check all model invariants; returns one message per violation.

    An empty list means the model is well formed.  Nothing is raised:
    diagnostics are data, so callers can report them all at once.
    """
    violations: list[str] = []
    if model.num_states < 1:
        violations.append(f"model must have at least one state, has {model.num_states}")
    seen: set[tuple[int, int, int]] = set()
    has_action = [False] * max(model.num_states, 0)
    for s, a, t, r in model.transitions:
        triple = f"({s}, {model.actions[a] if 0 <= a < len(model.actions) else a}, {t})"
        if not (0 <= s < model.num_states):
            violations.append(f"source state out of range in transition {triple}")
            continue
        if not (0 <= a < len(model.actions)):
            violations.append(f"action index out of range in transition {triple}")
            continue
        if not (0 <= t < model.num_states):
            violations.append(f"target state out of range in transition {triple}")
            continue
        if not (math.isfinite(r) and r > 0.0):
            violations.append(f"nonpositive or non-finite rate {r} on transition {triple}")
        if (s, a, t) in seen:
            violations.append(f"duplicate transition {triple}")
        seen.add((s, a, t))
        has_action[s] = True
    for s in range(model.num_states):
        if not has_action[s]:
            violations.append(f"no enabled action at state {s}")
    return violations


def exit_rate(model: Ctmdp, s: int, a: int) -> float:
    """Total outgoing rate of action a in state s (sojourn rate).

    Uses exact float summation, so the result does not depend on the
    order of the transitions list.
    """
    rates = [r for src, act, _, r in model.transitions if src == s and act == a]
    if not rates:
        raise ValueError(f"action not enabled: action {a} in state {s}")
    return math.fsum(rates)


def embedded_prob(model: Ctmdp, s: int, a: int, t: int) -> float:
    """Jump probability from s to t when performing a (rate ratio)."""
    total = exit_rate(model, s, a)
    rate_to_t = 0.0
    for src, act, tgt, r in model.transitions:
        if src == s and act == a and tgt == t:
            rate_to_t += r
    return rate_to_t / total


def max_exit_rate(model: Ctmdp) -> float:
    """Largest exit rate over all (state, action) pairs."""
    groups = grouped_transitions(model)
    if not groups:
        raise ValueError("model has no transitions")
    return max(math.fsum(r for _, r in row) for row in groups.values())


# ---------------------------------------------------------------------------
# JSON model format:
#   {"states": N, "actions": ["a","b"],
#    "transitions": [[src, actIdx, dst, rate], ...],
#    "labels": {"0": "init"}}
# Goal sets ride in a separate document: {"goal": [3, 7]}
# ---------------------------------------------------------------------------


def parse_model(doc: dict) -> Ctmdp:
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    try:
        num_states = int(doc["states"])
        actions = tuple(str(a) for a in doc["actions"])
        raw = doc["transitions"]
    except KeyError as exc:
        raise ModelFormatError(f"model document missing field {exc.args[0]!r}") from None
    transitions = []
    for i, entry in enumerate(raw):
        if len(entry) != 4:
            raise ModelFormatError(f"transition #{i} must be [src, actIdx, dst, rate]")
        s, a, t, r = int(entry[0]), int(entry[1]), int(entry[2]), float(entry[3])
        if not (math.isfinite(r) and r > 0.0):
            raise ModelFormatError(f"transition #{i} has nonpositive rate {r}; zero-rate triples are rejected")
        transitions.append((s, a, t, r))
    labels = {int(k): str(v) for k, v in doc.get("labels", {}).items()}
    return Ctmdp(num_states, actions, tuple(transitions), labels)


def load_model(path) -> Ctmdp:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not valid JSON: {exc}") from None
    return parse_model(doc)


def model_to_dict(model: Ctmdp) -> dict:
    doc = {
        "states": model.num_states,
        "actions": list(model.actions),
        "transitions": [[s, a, t, r] for s, a, t, r in model.transitions],
    }
    if model.state_labels:
        doc["labels"] = {str(k): v for k, v in sorted(model.state_labels.items())}
    return doc


def dump_model(model: Ctmdp, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh)
        fh.write("\n")


def parse_goal(doc: dict, num_states: int) -> GoalSpec:
    if not isinstance(doc, dict) or "goal" not in doc:
        raise ModelFormatError('goal document must be an object with a "goal" list')
    states = [int(g) for g in doc["goal"]]
    for g in states:
        if not (0 <= g < num_states):
            raise ModelFormatError(f"goal state {g} out of range for {num_states} states")
    return GoalSpec(frozenset(states))


def load_goal(path, num_states: int) -> GoalSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not valid JSON: {exc}") from None
    return parse_goal(doc, num_states)
