"""Exact offline planner: the weekly assignment problem as a min-cost flow.

Network layout (per-container form)::

    source -> container i          cap 1,      cost 0
    container i -> schedule t      cap 1,      cost C_t   (only if t departs on/after
                                                           availability and arrives by due day)
    container i -> sink            cap 1,      cost C     (truck)
    schedule t -> sink             cap cap_t,  cost 0

The constraint matrix is a transportation structure, so an integral min-cost
flow of value |containers| is an optimal 0/1 plan. The aggregated form merges
containers with identical (earliest, due) into one node of capacity = count,
which gives the same optimum with far fewer augmentations.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .domain import TRUCK, Assignment, Container, WeekScenario, total_cost

INF = float("inf")


class FlowInfeasible(RuntimeError):
    pass


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    capacity: int
    cost: int


@dataclass
class FlowNetwork:
    num_nodes: int
    source: int
    sink: int
    demand: int
    arcs: List[Arc] = field(default_factory=list)
    # bookkeeping for decoding a flow back into an assignment
    labels: Dict[int, tuple] = field(default_factory=dict)
    groups: List[List[int]] = field(default_factory=list)

    def add_arc(self, tail: int, head: int, capacity: int, cost: int) -> int:
        if cost < 0:
            raise ValueError("arc costs must be non-negative")
        if capacity < 0 or int(capacity) != capacity:
            raise ValueError("arc capacities must be non-negative integers")
        self.arcs.append(Arc(tail, head, int(capacity), cost))
        return len(self.arcs) - 1


def min_cost_flow(network: FlowNetwork, check_potentials: bool = False) -> Tuple[List[int], int]:
    """Successive shortest augmenting paths with Johnson potentials.

    Returns per-arc flows (same order as ``network.arcs``) and the total cost.
    Paths are found by Dijkstra on reduced costs; ties resolve to the lowest
    node index, so the result is deterministic.
    """
    n = network.num_nodes
    # residual graph: edge e and its reverse e ^ 1
    head: List[int] = []
    cap: List[int] = []
    cost: List[int] = []
    adj: List[List[int]] = [[] for _ in range(n)]
    for a in network.arcs:
        adj[a.tail].append(len(head))
        head.append(a.head)
        cap.append(a.capacity)
        cost.append(a.cost)
        adj[a.head].append(len(head))
        head.append(a.tail)
        cap.append(0)
        cost.append(-a.cost)

    potential = [0] * n  # valid start: all costs non-negative
    s, t = network.source, network.sink
    flow = 0
    total = 0
    while flow < network.demand:
        dist = [INF] * n
        via = [-1] * n
        dist[s] = 0
        heap = [(0, s)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            pu = potential[u]
            for e in adj[u]:
                if cap[e] <= 0:
                    continue
                v = head[e]
                nd = d + cost[e] + pu - potential[v]
                if nd < dist[v]:
                    dist[v] = nd
                    via[v] = e
                    heapq.heappush(heap, (nd, v))
        if dist[t] == INF:
            raise FlowInfeasible(f"only {flow} of {network.demand} units can reach the sink")
        for v in range(n):
            if dist[v] < INF:
                potential[v] += dist[v]
        push = network.demand - flow
        v = t
        while v != s:
            e = via[v]
            push = min(push, cap[e])
            v = head[e ^ 1]
        v = t
        while v != s:
            e = via[v]
            cap[e] -= push
            cap[e ^ 1] += push
            total += push * cost[e]
            v = head[e ^ 1]
        flow += push
        if check_potentials:
            for u in range(n):
                if potential[u] == INF:
                    continue
                for e in adj[u]:
                    if cap[e] > 0 and dist[head[e]] < INF and dist[u] < INF:
                        assert cost[e] + potential[u] - potential[head[e]] >= 0, "negative reduced cost"

    flows = [cap[2 * i + 1] for i in range(len(network.arcs))]
    return flows, total


def _eligible(c_e: int, c_l: int, depart: int, arrive: int) -> bool:
    return depart >= c_e and arrive <= c_l


def build_network(
    scenario: WeekScenario,
    containers: Optional[Sequence[Container]] = None,
    capacities: Optional[Sequence[int]] = None,
    allowed: Optional[Sequence[bool]] = None,
    aggregate: bool = False,
) -> FlowNetwork:
    """Flow network for ``containers`` (default: all) against the scenario's trains.

    ``capacities`` overrides schedule capacities and ``allowed`` switches
    schedules off; both are used by the rolling re-planners.
    """
    containers = list(scenario.containers if containers is None else containers)
    schedules = scenario.schedules
    caps = [s.capacity for s in schedules] if capacities is None else list(capacities)
    allowed = [True] * len(schedules) if allowed is None else list(allowed)

    if aggregate:
        groups: Dict[Tuple[int, int], List[int]] = {}
        for c in containers:
            groups.setdefault((c.earliest_day, c.due_day), []).append(c.id)
        demand_nodes = [(key, ids) for key, ids in sorted(groups.items())]
    else:
        demand_nodes = [((c.earliest_day, c.due_day), [c.id]) for c in containers]

    n_dem = len(demand_nodes)
    source = 0
    sched_base = 1 + n_dem
    sink = sched_base + len(schedules)
    net = FlowNetwork(sink + 1, source, sink, len(containers))
    for k, ((e, l), ids) in enumerate(demand_nodes):
        node = 1 + k
        net.add_arc(source, node, len(ids), 0)
        for s in schedules:
            if allowed[s.id] and caps[s.id] > 0 and _eligible(e, l, s.depart_day, s.arrive_day):
                idx = net.add_arc(node, sched_base + s.id, len(ids), s.cost_per_container)
                net.labels[idx] = ("train", k, s.id)
        idx = net.add_arc(node, sink, len(ids), scenario.truck_cost)
        net.labels[idx] = ("truck", k, None)
    for s in schedules:
        net.add_arc(sched_base + s.id, sink, max(caps[s.id], 0) if allowed[s.id] else 0, 0)
    net.groups = [list(ids) for _, ids in demand_nodes]
    return net


def decode_flow(network: FlowNetwork, flows: Sequence[int]) -> Assignment:
    pending = [list(ids) for ids in network.groups]
    assignment: Assignment = {}
    for idx, label in sorted(network.labels.items()):
        kind, k, sid = label
        for _ in range(flows[idx]):
            cid = pending[k].pop(0)
            assignment[cid] = TRUCK if kind == "truck" else sid
    return assignment


def solve_subset(
    scenario: WeekScenario,
    containers: Sequence[Container],
    capacities: Optional[Sequence[int]] = None,
    allowed: Optional[Sequence[bool]] = None,
    aggregate: bool = True,
) -> Tuple[Assignment, int]:
    net = build_network(scenario, containers, capacities, allowed, aggregate=aggregate)
    flows, cost = min_cost_flow(net)
    return decode_flow(net, flows), cost


def solve_optimal(scenario: WeekScenario, aggregate: bool = True) -> Tuple[Assignment, int]:
    """Minimum-cost feasible assignment for the whole week and its cost."""
    assignment, cost = solve_subset(scenario, scenario.containers, aggregate=aggregate)
    assert total_cost(assignment, scenario) == cost
    return assignment, cost


BRUTE_FORCE_LIMIT = 8


def brute_force_optimal(scenario: WeekScenario) -> int:
    """Enumerate every per-container vehicle choice; small instances only."""
    containers = scenario.containers
    if len(containers) > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force refuses {len(containers)} > {BRUTE_FORCE_LIMIT} containers")
    options = []
    for c in containers:
        opts = [TRUCK] + [
            s.id for s in scenario.schedules if _eligible(c.earliest_day, c.due_day, s.depart_day, s.arrive_day)
        ]
        options.append(opts)
    caps = [s.capacity for s in scenario.schedules]
    best = None
    for choice in itertools.product(*options):
        used = [0] * len(caps)
        cost = 0
        ok = True
        for tid in choice:
            if tid is TRUCK:
                cost += scenario.truck_cost
            else:
                used[tid] += 1
                if used[tid] > caps[tid]:
                    ok = False
                    break
                cost += scenario.schedules[tid].cost_per_container
        if ok and (best is None or cost < best):
            best = cost
    return 0 if best is None else best
