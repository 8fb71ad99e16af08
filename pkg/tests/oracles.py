"""Independent oracles used to freeze expected values.

Everything here is computed without touching the solver code paths:
closed forms, arbitrary-precision series, or a crude fixed-step
discretisation.  Keep it that way; the whole point is that these can
disagree with the package when the package is wrong.
"""

import math

import mpmath as mp


def erlang_cdf(stages: int, rate: float, t: float) -> float:
    """P(sum of `stages` iid exponential(rate) variables <= t)."""
    rt = rate * t
    terms = [math.exp(-rt) * rt**k / math.factorial(k) for k in range(stages)]
    return 1.0 - math.fsum(terms)


def mp_poisson_pmf(rate_time: float, i: int) -> mp.mpf:
    with mp.workdps(60):
        rt = mp.mpf(rate_time)
        return mp.e ** (-rt) * rt**i / mp.factorial(i)


def mp_poisson_tail(rate_time: float, depth: int) -> float:
    """Mass of Poisson(rate_time) at or beyond depth, 60-digit arithmetic.

    Direct series for small depths; the regularized incomplete gamma
    identity P(X >= n) = P(n, rate_time) for large ones.
    """
    with mp.workdps(60):
        rt = mp.mpf(rate_time)
        if depth <= 2000:
            head = mp.fsum(mp.e ** (-rt) * rt**i / mp.factorial(i) for i in range(depth))
            return float(1 - head)
        return float(mp.gammainc(depth, 0, rt, regularized=True))


def two_exp_sum_cdf(a: float, b: float, t: float) -> float:
    """P(X + Y <= t) for independent X ~ exp(a), Y ~ exp(b)."""
    if a == b:
        return erlang_cdf(2, a, t)
    return 1.0 - (b * math.exp(-a * t) - a * math.exp(-b * t)) / (b - a)


def single_proc_two_jobs_value(r1: float, r2: float, t: float) -> float:
    """Optimal P(both jobs done by t) with one processor: best static order.

    With one processor the elapsed time is the sum of the two services
    whatever the interleaving, so both orders coincide; the max is kept
    as written to stay a genuine brute force over the static orders.
    """
    return max(two_exp_sum_cdf(r1, r2, t), two_exp_sum_cdf(r2, r1, t))


# --- two-route race model ---------------------------------------------------
# State 0 chooses between "safe" (rate 1 straight to the goal) and "rush"
# (rate 3 total, fair coin between goal and a dead trap).  With remaining
# time t and current win probability v, safe improves at rate 1-v and rush
# at 1.5-3v, so the optimal late policy rushes below the indifference
# level v=1/4 and plays safe above it; integrating the two regimes gives
# the closed forms below.  An early scheduler decides once, state 0 is
# entered only once, so its value is the better constant action.

RACE_SWITCH_MAX = math.log(2.0) / 3.0       # rush until here (maximising)
RACE_SWITCH_MIN = math.log(4.0 / 3.0)       # safe until here (minimising)


def race_late_max(t: float) -> float:
    if t <= RACE_SWITCH_MAX:
        return 0.5 * (1.0 - math.exp(-3.0 * t))
    return 1.0 - 0.75 * math.exp(-(t - RACE_SWITCH_MAX))


def race_early_max(t: float) -> float:
    return max(1.0 - math.exp(-t), 0.5 * (1.0 - math.exp(-3.0 * t)))


def race_late_min(t: float) -> float:
    if t <= RACE_SWITCH_MIN:
        return 1.0 - math.exp(-t)
    return 0.5 - 0.25 * math.exp(-3.0 * (t - RACE_SWITCH_MIN))


def race_early_min(t: float) -> float:
    return min(1.0 - math.exp(-t), 0.5 * (1.0 - math.exp(-3.0 * t)))


def discretised_value(model, goal_states, time_bound, steps, objective="max"):
    """Crude fixed-step dynamic program over the optimality equation.

    Explicit first-order stepping: error is O(time_bound/steps), so treat
    results as a loose cross-check only.  Late-scheduler semantics (the
    action may be reconsidered in every slice).
    """
    n = model.num_states
    h = time_bound / steps
    rows = {}
    for s, a, t, r in model.transitions:
        rows.setdefault((s, a), []).append((t, r))
    by_state = [[] for _ in range(n)]
    for (s, a), row in sorted(rows.items()):
        exit_rate = math.fsum(r for _, r in row)
        by_state[s].append((exit_rate, row))
    goal = set(goal_states)
    better = max if objective == "max" else min

    v = [1.0 if s in goal else 0.0 for s in range(n)]
    for _ in range(steps):
        new = list(v)
        for s in range(n):
            if s in goal:
                continue
            new[s] = better(
                (1.0 - exit_rate * h) * v[s] + h * sum(r * v[t] for t, r in row)
                for exit_rate, row in by_state[s]
            )
        v = new
    return v
