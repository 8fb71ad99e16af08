"""Numba kernel backend.

The sweeps run the per-step backups as tight scalar loops: within one
(state, action) pair, contributions accumulate sequentially in ascending
target order, so results are reproducible and the frozen sweep matches the
optimising sweep bit for bit.

Random numbers come from xoshiro256**, seeded per trajectory from
disjoint blocks of a single splitmix64 stream; trajectory i is therefore
independent of how many other trajectories run or in which order.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NAME = "numba"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U0 = np.uint64(0)
_U4 = np.uint64(4)
_U5 = np.uint64(5)
_U7 = np.uint64(7)
_U9 = np.uint64(9)
_U11 = np.uint64(11)
_U17 = np.uint64(17)
_U19 = np.uint64(19)
_U27 = np.uint64(27)
_U30 = np.uint64(30)
_U31 = np.uint64(31)
_U45 = np.uint64(45)
_U57 = np.uint64(57)
_TWO_NEG53 = 2.0**-53


@njit(cache=True)
def u_sweep(pair_start, pair_action, row_start, col, prob, is_goal, suffix, maximize):
    depth = suffix.shape[0]
    n = pair_start.shape[0] - 1
    u = np.zeros(n, np.float64)
    u_next = np.zeros(n, np.float64)
    decisions = np.empty((depth, n), np.int32)
    for k in range(depth - 1, -1, -1):
        for s in range(n):
            if is_goal[s]:
                u_next[s] = suffix[k]
                decisions[k, s] = pair_action[pair_start[s]]
            else:
                best = 0.0
                best_a = np.int32(-1)
                for p in range(pair_start[s], pair_start[s + 1]):
                    acc = 0.0
                    for e in range(row_start[p], row_start[p + 1]):
                        acc += prob[e] * u[col[e]]
                    if best_a == -1 or (maximize and acc > best) or (not maximize and acc < best):
                        best = acc
                        best_a = pair_action[p]
                if best < 0.0:
                    best = 0.0
                elif best > 1.0:
                    best = 1.0
                u_next[s] = best
                decisions[k, s] = best_a
        u, u_next = u_next, u
    return u, decisions


@njit(cache=True)
def u_sweep_frozen(pair_start, pair_action, row_start, col, prob, is_goal, suffix, decisions, pair_of):
    depth = suffix.shape[0]
    n = pair_start.shape[0] - 1
    u = np.zeros(n, np.float64)
    u_next = np.zeros(n, np.float64)
    for k in range(depth - 1, -1, -1):
        for s in range(n):
            if is_goal[s]:
                u_next[s] = suffix[k]
            else:
                p = pair_of[s, decisions[k, s]]
                acc = 0.0
                for e in range(row_start[p], row_start[p + 1]):
                    acc += prob[e] * u[col[e]]
                if acc < 0.0:
                    acc = 0.0
                elif acc > 1.0:
                    acc = 1.0
                u_next[s] = acc
        u, u_next = u_next, u
    return u


@njit(cache=True)
def v_sweep(pair_start, row_start, col, prob, is_goal, weights, maximize):
    depth = weights.shape[0]
    n = pair_start.shape[0] - 1
    vp = np.zeros(n, np.float64)
    vp_next = np.zeros(n, np.float64)
    v0 = np.zeros(n, np.float64)
    for k in range(depth - 1, -1, -1):
        w = weights[depth - 1 - k]
        for s in range(n):
            if is_goal[s]:
                val = 1.0
            else:
                first = True
                best = 0.0
                for p in range(pair_start[s], pair_start[s + 1]):
                    acc = 0.0
                    for e in range(row_start[p], row_start[p + 1]):
                        acc += prob[e] * vp[col[e]]
                    if first or (maximize and acc > best) or (not maximize and acc < best):
                        best = acc
                        first = False
                if best < 0.0:
                    best = 0.0
                elif best > 1.0:
                    best = 1.0
                val = best
            vp_next[s] = val
            v0[s] += w * val
        vp, vp_next = vp_next, vp
    for s in range(n):
        if v0[s] < 0.0:
            v0[s] = 0.0
        elif v0[s] > 1.0:
            v0[s] = 1.0
    return v0


@njit(cache=True)
def _splitmix_next(state):
    state = state + _GOLDEN
    z = state
    z = (z ^ (z >> _U30)) * _MIX1
    z = (z ^ (z >> _U27)) * _MIX2
    return state, z ^ (z >> _U31)


@njit(cache=True)
def _stream_init(seed, index, s):
    state = seed + _U4 * index * _GOLDEN
    nonzero = _U0
    for j in range(4):
        state, z = _splitmix_next(state)
        s[j] = z
        nonzero |= z
    if nonzero == _U0:
        s[0] = _GOLDEN


@njit(cache=True)
def _xoshiro_next(s):
    s1 = s[1]
    x = s1 * _U5
    result = ((x << _U7) | (x >> _U57)) * _U9
    t = s1 << _U17
    s[2] ^= s[0]
    s[3] ^= s1
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    z = s[3]
    s[3] = (z << _U45) | (z >> _U19)
    return result


@njit(cache=True)
def _next_unit(s):
    return np.float64(_xoshiro_next(s) >> _U11) * _TWO_NEG53


@njit(cache=True)
def walk_scheduler(pair_start, row_start, col, prob, is_goal, pair_of,
                   lam, time_bound, decisions, tail, entry, runs, seed):
    depth = decisions.shape[0]
    successes = 0
    rng = np.empty(4, np.uint64)
    for i in range(runs):
        _stream_init(seed, np.uint64(i), rng)
        s = entry
        if is_goal[s]:
            successes += 1
            continue
        t = 0.0
        step = 0
        while True:
            if step < depth:
                a = decisions[step, s]
            else:
                a = tail[s]
            t += -np.log(1.0 - _next_unit(rng)) / lam
            if t > time_bound:
                break
            p = pair_of[s, a]
            u = _next_unit(rng)
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


@njit(cache=True)
def walk_baseline(pair_start, pair_exit, row_start, col, prob, is_goal, pair_of,
                  time_bound, uniform_policy, table, initial, runs, seed):
    successes = 0
    rng = np.empty(4, np.uint64)
    for i in range(runs):
        _stream_init(seed, np.uint64(i), rng)
        s = initial
        if is_goal[s]:
            successes += 1
            continue
        t = 0.0
        while True:
            if uniform_policy:
                n_here = pair_start[s + 1] - pair_start[s]
                idx = np.int64(_next_unit(rng) * n_here)
                if idx >= n_here:
                    idx = n_here - 1
                p = pair_start[s] + idx
            else:
                p = pair_of[s, table[s]]
            t += -np.log(1.0 - _next_unit(rng)) / pair_exit[p]
            if t > time_bound:
                break
            u = _next_unit(rng)
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
