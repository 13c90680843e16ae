import numpy as np
import pytest

from conftest import random_small_scenario
from railplan.domain import TRUCK, make_scenario, total_cost, validate
from railplan.exact import (
    FlowInfeasible,
    FlowNetwork,
    brute_force_optimal,
    build_network,
    decode_flow,
    min_cost_flow,
    solve_optimal,
)
from railplan.scenario import GeneratorConfig, generate_week


def test_empty_scenario():
    sc = make_scenario([1, 1], [])
    assert solve_optimal(sc) == ({}, 0)
    flows, cost = min_cost_flow(build_network(sc))
    assert cost == 0


def test_single_container_takes_train():
    sc = make_scenario([1], [(1, 7)])
    assignment, cost = solve_optimal(sc)
    assert assignment == {0: 0} and cost == 15


def test_brute_force_hand_cases():
    sc = make_scenario([1], [(1, 7), (1, 7)])
    assert brute_force_optimal(sc) == 515
    # nobody can use the only train (departs day 1, containers ready day 3)
    sc = make_scenario([5], [(3, 7)] * 3)
    assert brute_force_optimal(sc) == 1500
    assert solve_optimal(sc)[1] == 1500


def test_brute_force_refuses_large():
    with pytest.raises(ValueError):
        brute_force_optimal(make_scenario([1], [(1, 7)] * 9))


def test_chain_network():
    net = FlowNetwork(3, 0, 2, 1)
    net.add_arc(0, 1, 1, 4)
    net.add_arc(1, 2, 1, 6)
    flows, cost = min_cost_flow(net)
    assert flows == [1, 1] and cost == 10


def test_unreachable_demand():
    net = FlowNetwork(3, 0, 2, 2)
    net.add_arc(0, 1, 1, 0)
    net.add_arc(1, 2, 5, 0)
    with pytest.raises(FlowInfeasible):
        min_cost_flow(net)


def test_negative_cost_rejected():
    net = FlowNetwork(2, 0, 1, 1)
    with pytest.raises(ValueError):
        net.add_arc(0, 1, 1, -1)


def test_flow_needs_rerouting():
    # greedy shortest path first grabs the cheap middle arc; optimum must undo it
    net = FlowNetwork(4, 0, 3, 2)
    net.add_arc(0, 1, 1, 0)
    net.add_arc(0, 2, 1, 0)
    net.add_arc(1, 3, 1, 10)
    net.add_arc(1, 2, 1, 0)
    net.add_arc(2, 3, 1, 1)
    flows, cost = min_cost_flow(net, check_potentials=True)
    assert cost == 11


@pytest.mark.parametrize("aggregate", [False, True])
def test_matches_brute_force_on_random_small_instances(aggregate):
    rng = np.random.default_rng(2024)
    for i in range(200):
        sc = random_small_scenario(rng, costs=bool(i % 2))
        assignment, cost = solve_optimal(sc, aggregate=aggregate)
        validate(assignment, sc)
        assert cost == total_cost(assignment, sc)
        assert cost == brute_force_optimal(sc), sc


def test_network_shape_per_container():
    sc = make_scenario([2, 0], [(1, 7), (3, 3)], pairs=[(1, 2), (3, 3)])
    net = build_network(sc)
    # source + 2 containers + 2 schedules + sink
    assert net.num_nodes == 6
    truck_arcs = [a for a in net.arcs if a.head == net.sink and a.cost == sc.truck_cost]
    assert len(truck_arcs) == 2
    assert all(a.cost >= 0 for a in net.arcs)


def test_full_week_lower_bound_and_flow_decomposition():
    for seed in range(5):
        sc = generate_week(GeneratorConfig(seed=seed))
        net = build_network(sc, aggregate=False)
        flows, cost = min_cost_flow(net, check_potentials=True)
        assignment = decode_flow(net, flows)
        validate(assignment, sc)
        agg_assignment, agg_cost = solve_optimal(sc)
        assert cost == agg_cost == total_cost(assignment, sc)
        sched_base = 1 + len(sc.containers)
        for i, arc in enumerate(net.arcs):
            if arc.tail >= sched_base and arc.head == net.sink:
                sid = arc.tail - sched_base
                assert flows[i] == sum(1 for t in assignment.values() if t == sid) <= sc.schedules[sid].capacity
        # any feasible plan, e.g. all trucks, is no cheaper
        assert cost <= len(sc.containers) * sc.truck_cost
