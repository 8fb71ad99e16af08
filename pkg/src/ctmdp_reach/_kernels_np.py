"""Pure-numpy kernel backend.

Vectorised equivalents of the numba kernels, selected when numba is
unavailable or when the CTMDP_REACH_BACKEND environment flag forces them.
Per-pair row sums use np.add.reduceat over the CSR layout, which is
deterministic for a fixed model; the frozen sweep reuses the identical
reduction, so optimising and frozen passes agree bit for bit within this
backend.
"""

from __future__ import annotations

import math

import numpy as np

NAME = "numpy"

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_TWO_NEG53 = 2.0**-53


def u_sweep(pair_start, pair_action, row_start, col, prob, is_goal, suffix, maximize):
    """Backward optimal sweep; returns the step-0 vector and all decisions."""
    depth = suffix.shape[0]
    n = pair_start.shape[0] - 1
    n_pairs = pair_action.shape[0]
    seg = row_start[:-1]
    pstart = pair_start[:-1]
    pair_state = np.repeat(np.arange(n), np.diff(pair_start))
    pair_idx = np.arange(n_pairs, dtype=np.int64)
    goal_dec = pair_action[pstart]  # lowest enabled action per state
    reduce_best = np.maximum.reduceat if maximize else np.minimum.reduceat

    u = np.zeros(n, dtype=np.float64)
    decisions = np.empty((depth, n), dtype=np.int32)
    for k in range(depth - 1, -1, -1):
        sums = np.add.reduceat(prob * u[col], seg)
        best = reduce_best(sums, pstart)
        # first pair attaining the optimum -> lowest action index wins
        cand = np.where(sums == best[pair_state], pair_idx, n_pairs)
        winner = np.minimum.reduceat(cand, pstart)
        dec = pair_action[winner]
        u = np.clip(best, 0.0, 1.0)
        u[is_goal] = suffix[k]
        dec[is_goal] = goal_dec[is_goal]
        decisions[k] = dec
    return u, decisions


def u_sweep_frozen(pair_start, pair_action, row_start, col, prob, is_goal, suffix, decisions, pair_of):
    """Backward sweep with actions fixed to a decision table."""
    depth = suffix.shape[0]
    n = pair_start.shape[0] - 1
    seg = row_start[:-1]
    states = np.arange(n)
    u = np.zeros(n, dtype=np.float64)
    for k in range(depth - 1, -1, -1):
        sums = np.add.reduceat(prob * u[col], seg)
        chosen = pair_of[states, decisions[k]]
        u = np.clip(sums[chosen], 0.0, 1.0)
        u[is_goal] = suffix[k]
    return u


def v_sweep(pair_start, row_start, col, prob, is_goal, weights, maximize):
    """Step-bounded sweep accumulated against the Poisson weights."""
    depth = weights.shape[0]
    n = pair_start.shape[0] - 1
    seg = row_start[:-1]
    pstart = pair_start[:-1]
    reduce_best = np.maximum.reduceat if maximize else np.minimum.reduceat

    vp = np.zeros(n, dtype=np.float64)
    v0 = np.zeros(n, dtype=np.float64)
    for k in range(depth - 1, -1, -1):
        sums = np.add.reduceat(prob * vp[col], seg)
        vp = np.clip(reduce_best(sums, pstart), 0.0, 1.0)
        vp[is_goal] = 1.0
        v0 += weights[depth - 1 - k] * vp
    return np.clip(v0, 0.0, 1.0)


# -- pseudorandom core: xoshiro256** seeded from one splitmix64 stream ------
# Trajectory i consumes the splitmix block [4i+1, 4i+4], so substreams never
# overlap and the estimate is independent of trajectory scheduling.


def _splitmix_next(state):
    state = (state + _GOLDEN) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return state, z ^ (z >> 31)


def _stream_init(seed, index):
    state = (seed + 4 * index * _GOLDEN) & _MASK
    words = []
    for _ in range(4):
        state, z = _splitmix_next(state)
        words.append(z)
    if not any(words):
        words[0] = _GOLDEN
    return words


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK


def _xoshiro_next(s):
    result = (_rotl((s[1] * 5) & _MASK, 7) * 9) & _MASK
    t = (s[1] << 17) & _MASK
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


def _next_unit(s):
    return (_xoshiro_next(s) >> 11) * _TWO_NEG53


def walk_scheduler(pair_start, row_start, col, prob, is_goal, pair_of,
                   lam, time_bound, decisions, tail, entry, runs, seed):
    """Count trajectories of the uniform chain that enter a goal state in time."""
    seed = int(seed) & _MASK
    depth = decisions.shape[0]
    successes = 0
    for i in range(runs):
        state = _stream_init(seed, i)
        s = entry
        if is_goal[s]:
            successes += 1
            continue
        t = 0.0
        step = 0
        while True:
            a = decisions[step, s] if step < depth else tail[s]
            t += -math.log(1.0 - _next_unit(state)) / lam
            if t > time_bound:
                break
            p = pair_of[s, a]
            u = _next_unit(state)
            cum = 0.0
            nxt = col[row_start[p + 1] - 1]
            for e in range(row_start[p], row_start[p + 1]):
                cum += prob[e]
                if u < cum:
                    nxt = col[e]
                    break
            s = nxt
            step += 1
            if is_goal[s]:
                successes += 1
                break
    return successes


def walk_baseline(pair_start, pair_exit, row_start, col, prob, is_goal, pair_of,
                  time_bound, uniform_policy, table, initial, runs, seed):
    """Count goal hits of the original model under a memoryless policy."""
    seed = int(seed) & _MASK
    successes = 0
    for i in range(runs):
        state = _stream_init(seed, i)
        s = initial
        if is_goal[s]:
            successes += 1
            continue
        t = 0.0
        while True:
            if uniform_policy:
                n_here = pair_start[s + 1] - pair_start[s]
                idx = int(_next_unit(state) * n_here)
                if idx >= n_here:
                    idx = n_here - 1
                p = pair_start[s] + idx
            else:
                p = pair_of[s, table[s]]
            t += -math.log(1.0 - _next_unit(state)) / pair_exit[p]
            if t > time_bound:
                break
            u = _next_unit(state)
            cum = 0.0
            nxt = col[row_start[p + 1] - 1]
            for e in range(row_start[p], row_start[p + 1]):
                cum += prob[e]
                if u < cum:
                    nxt = col[e]
                    break
            s = nxt
            if is_goal[s]:
                successes += 1
                break
    return successes
