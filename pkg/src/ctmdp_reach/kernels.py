"""Kernel backend selection and the compiled sparse model layout.

Two interchangeable backends provide the hot loops: numba-jitted scalar
kernels (default when numba is importable) and a vectorised pure-numpy
fallback.  The CTMDP_REACH_BACKEND environment variable forces the choice:

    CTMDP_REACH_BACKEND=auto    numba if available, else numpy (default)
    CTMDP_REACH_BACKEND=numba   require numba, fail otherwise
    CTMDP_REACH_BACKEND=numpy   always use the fallback

Call sites may also pass an explicit backend name, which is how the
bundled benchmark compares the two in one process.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .model import Ctmdp, grouped_transitions

ENV_BACKEND = "CTMDP_REACH_BACKEND"

__all__ = ["ENV_BACKEND", "CompiledChain", "compile_chain", "impl", "backend_name"]


@dataclass(frozen=True)
class CompiledChain:
    """CSR-style embedded jump chain grouped by state, then action.

    For state s, its (state, action) pairs occupy pair_start[s]..
    pair_start[s+1]; pair p owns entries row_start[p]..row_start[p+1] of
    col/prob with targets ascending.  pair_of maps (state, action) to the
    pair index, -1 where the action is disabled.  Callers must validate
    the model first: every state needs at least one pair.
    """

    n_states: int
    pair_start: np.ndarray   # int64[n+1]
    pair_action: np.ndarray  # int32[pairs]
    pair_exit: np.ndarray    # float64[pairs]
    row_start: np.ndarray    # int64[pairs+1]
    col: np.ndarray          # int64[nnz]
    prob: np.ndarray         # float64[nnz]
    is_goal: np.ndarray      # bool[n]
    pair_of: np.ndarray      # int32[n, actions]


def compile_chain(model: Ctmdp, goal_states, uniform_rate: float | None = None) -> CompiledChain:
    """Build the array form; rows normalised by exit rate or a given rate.

    Pass uniform_rate for a uniformised model so the jump probabilities
    are exactly rate/lambda; otherwise each row divides by its own exit.
    """
    groups = grouped_transitions(model)
    n = model.num_states
    n_actions = len(model.actions)

    by_state: list[list[int]] = [[] for _ in range(n)]
    for (s, a) in groups:
        by_state[s].append(a)

    pair_start = np.zeros(n + 1, dtype=np.int64)
    pair_action: list[int] = []
    pair_exit: list[float] = []
    row_start: list[int] = [0]
    col: list[int] = []
    prob: list[float] = []
    pair_of = np.full((n, n_actions), -1, dtype=np.int32)

    for s in range(n):
        for a in sorted(by_state[s]):
            row = groups[(s, a)]
            pair_of[s, a] = len(pair_action)
            pair_action.append(a)
            exit_rate = math.fsum(r for _, r in row)
            pair_exit.append(exit_rate)
            denom = uniform_rate if uniform_rate is not None else exit_rate
            for t, r in row:
                col.append(t)
                prob.append(r / denom)
            row_start.append(len(col))
        pair_start[s + 1] = len(pair_action)

    is_goal = np.zeros(n, dtype=np.bool_)
    for g in goal_states:
        is_goal[g] = True

    return CompiledChain(
        n_states=n,
        pair_start=pair_start,
        pair_action=np.asarray(pair_action, dtype=np.int32),
        pair_exit=np.asarray(pair_exit, dtype=np.float64),
        row_start=np.asarray(row_start, dtype=np.int64),
        col=np.asarray(col, dtype=np.int64),
        prob=np.asarray(prob, dtype=np.float64),
        is_goal=is_goal,
        pair_of=pair_of,
    )


_loaded: dict[str, object] = {}


def impl(backend: str | None = None):
    """Kernel module for the requested backend (default: env flag)."""
    choice = backend if backend is not None else os.environ.get(ENV_BACKEND, "auto")
    choice = choice.strip().lower()
    if choice == "auto":
        try:
            return impl("numba")
        except ImportError:
            return impl("numpy")
    if choice in _loaded:
        return _loaded[choice]
    if choice == "numpy":
        from . import _kernels_np as mod
    elif choice == "numba":
        from . import _kernels_nb as mod
    else:
        raise ValueError(
            f"unknown kernel backend {choice!r}; expected auto, numba, or numpy"
        )
    _loaded[choice] = mod
    return mod


def backend_name(backend: str | None = None) -> str:
    """Resolved backend name, 'numba' or 'numpy'."""
    return impl(backend).NAME
