"""Comparison planners: greedy first/cheapest train and rolling k-ILP re-planning."""

from __future__ import annotations

from typing import Iterable, List, Sequence, Tuple

from .domain import DAYS, TRUCK, Assignment, WeekScenario
from .env import Heuristic, order_containers
from .exact import solve_subset

TWO_ILP_DAYS = (1, 4)
SEVEN_ILP_DAYS = tuple(range(1, DAYS + 1))


def _greedy(scenario: WeekScenario, heuristic, key) -> Assignment:
    residual = [s.capacity for s in scenario.schedules]
    assignment: Assignment = {}
    for c in order_containers(scenario.containers, heuristic):
        best = None
        for s in scenario.schedules:
            if residual[s.id] >= 1 and s.depart_day >= c.earliest_day and s.arrive_day <= c.due_day:
                if best is None or key(s) < key(best):
                    best = s
        if best is None:
            assignment[c.id] = TRUCK
        else:
            residual[best.id] -= 1
            assignment[c.id] = best.id
    return assignment


def first_train(scenario: WeekScenario, heuristic=Heuristic.FIFO) -> Assignment:
    """Earliest-departing eligible train (then earliest arrival, lowest id), else truck."""
    return _greedy(scenario, heuristic, lambda s: (s.depart_day, s.arrive_day, s.id))


def cheapest_train(scenario: WeekScenario, heuristic=Heuristic.FIFO) -> Assignment:
    """Cheapest eligible train (then earliest departure, lowest id), else truck."""
    return _greedy(scenario, heuristic, lambda s: (s.cost_per_container, s.depart_day, s.id))


def normalize_days(days: Iterable[int]) -> Tuple[int, ...]:
    out = tuple(sorted(set(int(d) for d in days)))
    if not out or out[0] < 1 or out[-1] > DAYS:
        raise ValueError(f"planning days must be a non-empty subset of 1..{DAYS}, got {days!r}")
    return out


def k_ilp(
    scenario: WeekScenario,
    planning_days: Sequence[int] = TWO_ILP_DAYS,
    departed_rule: bool = True,
) -> Assignment:
    """Re-run the exact planner on each planning day with only the containers seen so far.

    Decisions are committed irrevocably, trucks included. With ``departed_rule``
    (the default) trains that left before the planning day cannot be boarded;
    switching it off lets a late run book any train with spare capacity. Containers
    becoming available after the last planning day get a final run on day 7.
    """
    days = normalize_days(planning_days)
    if days[-1] != DAYS:
        days = days + (DAYS,)
    residual = [s.capacity for s in scenario.schedules]
    assignment: Assignment = {}
    for p in days:
        batch = [c for c in scenario.containers if c.earliest_day <= p and c.id not in assignment]
        if not batch:
            continue
        allowed = [(s.depart_day >= p) if departed_rule else True for s in scenario.schedules]
        plan, _ = solve_subset(scenario, batch, capacities=residual, allowed=allowed)
        for cid, tid in plan.items():
            assignment[cid] = tid
            if tid is not TRUCK:
                residual[tid] -= 1
    return assignment


def two_ilp(scenario: WeekScenario, **kw) -> Assignment:
    return k_ilp(scenario, TWO_ILP_DAYS, **kw)


def seven_ilp(scenario: WeekScenario, **kw) -> Assignment:
    return k_ilp(scenario, SEVEN_ILP_DAYS, **kw)
