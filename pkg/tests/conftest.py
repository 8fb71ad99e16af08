import math

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from ctmdp_reach import (
    Ctmdp,
    GoalSpec,
    Query,
    SimConfig,
    SjsParams,
    generate_grid_ctmc,
    generate_sjs,
    gu_solve,
    simulate_scheduler,
    uniformise_late,
)

settings.register_profile(
    "suite",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def make_m1() -> tuple[Ctmdp, GoalSpec]:
    """One transient state feeding an absorbing goal at rate 1."""
    model = Ctmdp(2, ("a",), ((0, 0, 1, 1.0), (1, 0, 1, 1.0)))
    return model, GoalSpec(frozenset({1}))


def make_m2() -> tuple[Ctmdp, GoalSpec]:
    """Single choice: action a reaches the goal at rate 2, action b at rate 1."""
    model = Ctmdp(2, ("a", "b"), ((0, 0, 1, 2.0), (0, 1, 1, 1.0), (1, 0, 1, 1.0)))
    return model, GoalSpec(frozenset({1}))


def make_race() -> tuple[Ctmdp, GoalSpec]:
    """Deadline gamble: safe slow route vs fast route that may dead-end.

    The optimal action flips as the deadline nears, so the certified gap
    closes only after several rate doublings; see oracles.race_late_max.
    """
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


def bundled_models() -> list[tuple[str, Ctmdp, GoalSpec]]:
    """The models every regression sweep runs over; initial state is 0."""
    suite = [
        ("m1", *make_m1()),
        ("m2", *make_m2()),
        ("race", *make_race()),
        ("grid-4", *generate_grid_ctmc(4, 1.0)),
        ("grid-3-r2", *generate_grid_ctmc(3, 2.0)),
        ("sjs-1-21", *generate_sjs(SjsParams(1, (2.0, 1.0)))),
        ("sjs-2-123", *generate_sjs(SjsParams(2, (1.0, 2.0, 3.0)))),
        ("sjs-3-12345", *generate_sjs(SjsParams(3, (1.0, 2.0, 3.0, 4.0, 5.0)))),
    ]
    return suite


@pytest.fixture(scope="session")
def m1():
    return make_m1()


@pytest.fixture(scope="session")
def m2():
    return make_m2()


@pytest.fixture(scope="session")
def race():
    return make_race()


@pytest.fixture(scope="session")
def bundled_suite():
    return bundled_models()


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger jit compilation once so timed assertions measure solves only."""
    model, goal = make_m1()
    res, sched = gu_solve(model, goal, Query(time_bound=0.5, epsilon=1e-3))
    um = uniformise_late(model, goal, sched.lam)
    simulate_scheduler(um, sched, SimConfig(runs=2, seed=0, time_bound=0.5))


# --- random small models for property tests --------------------------------


@st.composite
def small_ctmdps(draw):
    n = draw(st.integers(min_value=1, max_value=5))
    n_actions = draw(st.integers(min_value=1, max_value=3))
    rates = st.floats(min_value=0.05, max_value=8.0, allow_nan=False)
    transitions = set()
    for s in range(n):
        enabled = draw(
            st.lists(
                st.integers(min_value=0, max_value=n_actions - 1),
                min_size=1, max_size=n_actions, unique=True,
            )
        )
        for a in enabled:
            targets = draw(
                st.lists(st.integers(min_value=0, max_value=n - 1),
                         min_size=1, max_size=min(n, 3), unique=True)
            )
            for t in targets:
                transitions.add((s, a, t, draw(rates)))
    actions = tuple(f"a{i}" for i in range(n_actions))
    model = Ctmdp(n, actions, tuple(sorted(transitions)))
    goal = draw(st.sets(st.integers(min_value=0, max_value=n - 1), max_size=n))
    return model, GoalSpec(frozenset(goal))
