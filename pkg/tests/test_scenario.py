import numpy as np
import pytest

from railplan.domain import CostModel, week_pairs
from railplan.scenario import CAPACITY_SETTINGS, GeneratorConfig, generate_week, parse_capacity, week_seeds


@pytest.mark.parametrize("capacity", CAPACITY_SETTINGS)
def test_always_28_schedules(capacity):
    sc = generate_week(GeneratorConfig(capacity=capacity, seed=3))
    assert len(sc.schedules) == 28
    assert [(s.depart_day, s.arrive_day) for s in sc.schedules] == week_pairs()
    assert len(sc.containers) == 100


def test_fixed_capacity():
    sc = generate_week(GeneratorConfig(capacity=3, seed=1))
    assert all(s.capacity == 3 for s in sc.schedules)
    assert sc.total_capacity == 84


def test_deterministic():
    a = generate_week(GeneratorConfig(seed=42)).to_json()
    b = generate_week(GeneratorConfig(seed=42)).to_json()
    assert a == b
    assert a != generate_week(GeneratorConfig(seed=43)).to_json()


def test_ids_in_generation_order():
    sc = generate_week(GeneratorConfig(seed=5, containers_per_week=10))
    assert [c.id for c in sc.containers] == list(range(10))


def test_container_days_valid_and_due_allowed_equal():
    sc = generate_week(GeneratorConfig(seed=9, containers_per_week=2000))
    e = np.array([c.earliest_day for c in sc.containers])
    l = np.array([c.due_day for c in sc.containers])
    assert np.all((1 <= e) & (e <= l) & (l <= 7))
    assert np.any(e == l)


def test_strict_due_switch():
    sc = generate_week(GeneratorConfig(seed=9, containers_per_week=2000, allow_same_day_due=False))
    for c in sc.containers:
        assert c.due_day > c.earliest_day or c.earliest_day == 7


def _within_3_sigma(values, k):
    n = len(values)
    p = 1.0 / k
    sigma = np.sqrt(n * p * (1 - p))
    counts = np.bincount(values, minlength=k)
    return np.all(np.abs(counts - n * p) <= 3 * sigma), counts


def test_earliest_day_uniform():
    days = []
    for seed in range(100):
        days += [c.earliest_day - 1 for c in generate_week(GeneratorConfig(seed=seed)).containers]
    assert len(days) >= 10_000
    ok, counts = _within_3_sigma(np.array(days), 7)
    assert ok, counts


def test_due_day_uniform_given_earliest():
    # conditional on e, l is uniform over e..7
    sc = generate_week(GeneratorConfig(seed=1, containers_per_week=20_000))
    e = np.array([c.earliest_day for c in sc.containers])
    l = np.array([c.due_day for c in sc.containers])
    for day in (1, 4):
        ok, counts = _within_3_sigma(l[e == day] - day, 8 - day)
        assert ok, counts


def test_random_capacity_uniform():
    caps = []
    for seed in range(400):
        caps += [s.capacity for s in generate_week(GeneratorConfig(seed=seed, containers_per_week=0)).schedules]
    assert len(caps) >= 10_000
    ok, counts = _within_3_sigma(np.array(caps), 7)
    assert ok, counts


def test_parse_capacity():
    assert parse_capacity(4) == "4"
    assert parse_capacity("RANDOM") == "random"
    for bad in (0, 7, "x"):
        with pytest.raises(ValueError):
            parse_capacity(bad)
    with pytest.raises(ValueError):
        GeneratorConfig(containers_per_week=-1)


def test_cost_model_flows_into_schedules():
    costs = tuple(range(1, 29))
    sc = generate_week(GeneratorConfig(seed=0, cost_model=CostModel(truck_cost=900, train_costs=costs)))
    assert sc.truck_cost == 900
    assert [s.cost_per_container for s in sc.schedules] == list(costs)


def test_week_seeds_streams_disjoint():
    a = week_seeds(0, 50, 0)
    b = week_seeds(0, 50, 1)
    assert len(set(a)) == 50 and not set(a) & set(b)
    assert a == week_seeds(0, 50, 0)
