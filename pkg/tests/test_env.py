import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from railplan.domain import TRUCK, make_scenario, total_cost, week_pairs
from railplan.env import (
    Heuristic,
    InfeasibleAction,
    PlanningEnv,
    PlanState,
    action_mask,
    episode_cost,
    order_containers,
)
from railplan.scenario import GeneratorConfig, generate_week

PAIRS = week_pairs()


def clause_mask(caps, e, l):
    """Independent clause-by-clause evaluation over the 28 (d, a) pairs."""
    allowed = {28}
    for t, (d, a) in enumerate(PAIRS):
        if d >= e and a <= l and caps[t] >= 1:
            allowed.add(t)
    return allowed


def test_reset_orders_by_heuristic():
    sc = make_scenario([1] * 28, [(3, 5), (1, 7)])
    fifo = PlanningEnv(sc, "fifo")
    assert (fifo.state.next_e, fifo.state.next_l) == (1, 7)
    edf = PlanningEnv(sc, Heuristic.EDF)
    assert (edf.state.next_e, edf.state.next_l) == (3, 5)


def test_ties_broken_by_id():
    sc = make_scenario([1] * 28, [(2, 4), (2, 4), (1, 7)])
    for h in Heuristic:
        ids = [c.id for c in order_containers(sc.containers, h) if (c.earliest_day, c.due_day) == (2, 4)]
        assert ids == [0, 1]
    # EDF tie on due day falls back to earliest day
    sc = make_scenario([1] * 28, [(3, 5), (1, 5)])
    assert [c.id for c in order_containers(sc.containers, "edf")] == [1, 0]


def test_empty_week_is_terminal_immediately():
    env = PlanningEnv(make_scenario([1] * 28, []))
    assert env.state is None and env.done
    assert episode_cost(env.transitions) == 0


def test_mask_examples():
    zero = PlanState(np.zeros(28, dtype=int), 1, 7)
    assert np.flatnonzero(action_mask(zero)).tolist() == [28]
    full = PlanState(np.ones(28, dtype=int), 1, 7)
    assert action_mask(full).all()
    s = PlanState(np.ones(28, dtype=int), 4, 5)
    got = set(np.flatnonzero(action_mask(s)).tolist())
    assert got == clause_mask(s.residual_caps, 4, 5)
    assert {PAIRS[t] for t in got if t < 28} == {(4, 4), (4, 5), (5, 5)}


def test_mask_matches_clause_evaluation_on_random_states():
    rng = np.random.default_rng(0)
    for _ in range(2000):
        caps = rng.integers(0, 7, size=28)
        e = int(rng.integers(1, 8))
        l = int(rng.integers(e, 8))
        got = set(np.flatnonzero(action_mask(PlanState(caps, e, l))).tolist())
        assert got == clause_mask(caps, e, l)


def test_step_rewards_and_capacity():
    sc = make_scenario([3] * 28, [(1, 7), (1, 7)])
    env = PlanningEnv(sc)
    tr = env.step(env.truck_action)
    assert tr.reward == -500
    assert np.array_equal(tr.next_state.residual_caps, tr.state.residual_caps)
    tr = env.step(5)
    assert tr.reward == -15
    assert tr.terminal and env.done
    assert env.assignment == {0: TRUCK, 1: 5}
    assert tr.state.residual_caps[5] == 3  # states are not mutated in place
    assert episode_cost(env.transitions) == 515


def test_masked_action_is_refused():
    sc = make_scenario([0] + [1] * 27, [(1, 7)])
    env = PlanningEnv(sc)
    with pytest.raises(InfeasibleAction):
        env.step(0)
    with pytest.raises(InfeasibleAction):
        env.step(29)
    # a train that leaves before the container is ready
    env = PlanningEnv(make_scenario([1] * 28, [(3, 7)]))
    with pytest.raises(InfeasibleAction):
        env.step(0)


def test_incomplete_episode_cost_refused():
    env = PlanningEnv(make_scenario([1] * 28, [(1, 7), (1, 7)]))
    env.step(28)
    with pytest.raises(ValueError):
        episode_cost(env.transitions)


def test_all_trucks_costs_50000():
    sc = generate_week(GeneratorConfig(seed=1))
    env = PlanningEnv(sc)
    while not env.done:
        env.step(env.truck_action)
    assert episode_cost(env.transitions) == 50_000


def test_features_normalised():
    s = PlanState(np.full(28, 6), 7, 7)
    f = s.features()
    assert f.shape == (30,)
    assert np.allclose(f, 1.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), heuristic=st.sampled_from(list(Heuristic)), policy=st.integers(0, 2**32 - 1))
def test_random_episode_invariants(seed, heuristic, policy):
    sc = generate_week(GeneratorConfig(seed=seed))
    env = PlanningEnv(sc, heuristic)
    rng = np.random.default_rng(policy)
    used = np.zeros(28, dtype=int)
    while not env.done:
        state = env.state
        assert np.array_equal(state.residual_caps, env.initial_caps - used)
        assert np.all(state.residual_caps >= 0)
        allowed = env.mask(state)
        assert allowed == clause_mask(state.residual_caps, state.next_e, state.next_l)
        a = int(rng.choice(sorted(allowed)))
        env.step(a)
        if a < 28:
            used[a] += 1
    assert len(env.transitions) == len(sc.containers)
    assert episode_cost(env.transitions) == total_cost(env.assignment, sc)


def test_trace_json():
    import json

    env = PlanningEnv(make_scenario([1] * 28, [(1, 7)]))
    env.step(0)
    rows = json.loads(env.trace_json())
    assert rows == [{"caps": [1] * 28, "e": 1, "l": 7, "action": 0, "reward": -15, "terminal": True}]
