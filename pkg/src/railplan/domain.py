"""Core domain types and the cost model shared by every planner.

Days are 1-based integers (1..7) and money is integer units. An assignment
maps container id to a schedule id, or to ``TRUCK`` (``None``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

DAYS = 7
DEFAULT_TRUCK_COST = 500
DEFAULT_TRAIN_COST = 15
SCENARIO_FORMAT_VERSION = 1

TRUCK = None

Vehicle = Optional[int]
Assignment = Dict[int, Vehicle]


class ConstraintViolation(ValueError):
    """An assignment breaks one of the planning constraints.

    ``constraint`` is one of ``"coverage"`` (each container exactly once),
    ``"departure"`` (train leaves before the container is available),
    ``"arrival"`` (train arrives after the due day) or ``"capacity"``.
    """

    def __init__(self, constraint: str, message: str, container_id=None, schedule_id=None):
        super().__init__(f"{constraint}: {message}")
        self.constraint = constraint
        self.container_id = container_id
        self.schedule_id = schedule_id


@dataclass(frozen=True)
class TrainSchedule:
    id: int
    depart_day: int
    arrive_day: int
    capacity: int
    cost_per_container: int = DEFAULT_TRAIN_COST

    def __post_init__(self):
        if self.depart_day > self.arrive_day:
            raise ValueError(f"schedule {self.id}: departs after it arrives")
        if self.capacity < 0:
            raise ValueError(f"schedule {self.id}: negative capacity")
        if self.cost_per_container < 0:
            raise ValueError(f"schedule {self.id}: negative cost")


@dataclass(frozen=True)
class Container:
    id: int
    earliest_day: int
    due_day: int

    def __post_init__(self):
        if not 1 <= self.earliest_day <= self.due_day <= DAYS:
            raise ValueError(
                f"container {self.id}: need 1 <= earliest ({self.earliest_day}) "
                f"<= due ({self.due_day}) <= {DAYS}"
            )


@dataclass(frozen=True)
class CostModel:
    """Truck cost; train costs live on each schedule. Trucks are uncapacitated."""

    truck_cost: int = DEFAULT_TRUCK_COST
    train_cost: int = DEFAULT_TRAIN_COST
    # optional per-schedule override, indexed by schedule id
    train_costs: Optional[Tuple[int, ...]] = None

    def cost_for(self, schedule_id: int) -> int:
        if self.train_costs is not None:
            return self.train_costs[schedule_id]
        return self.train_cost


def week_pairs(days: int = DAYS) -> List[Tuple[int, int]]:
    """All (depart, arrive) pairs with 1 <= depart <= arrive <= days, in id order."""
    return list(combinations_with_replacement(range(1, days + 1), 2))


@dataclass(frozen=True)
class WeekScenario:
    schedules: Tuple[TrainSchedule, ...]
    containers: Tuple[Container, ...]
    truck_cost: int = DEFAULT_TRUCK_COST
    seed: Optional[int] = None
    capacity_setting: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "schedules", tuple(self.schedules))
        object.__setattr__(self, "containers", tuple(self.containers))
        for idx, s in enumerate(self.schedules):
            if s.id != idx:
                raise ValueError("schedule ids must be 0..n-1 in order")
            if s.cost_per_container >= self.truck_cost:
                raise ValueError(f"schedule {s.id}: train must be cheaper than truck")
        ids = [c.id for c in self.containers]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate container ids")

    @property
    def is_full_week(self) -> bool:
        return [(s.depart_day, s.arrive_day) for s in self.schedules] == week_pairs()

    @property
    def total_capacity(self) -> int:
        return sum(s.capacity for s in self.schedules)

    def container(self, container_id: int) -> Container:
        for c in self.containers:
            if c.id == container_id:
                return c
        raise KeyError(container_id)

    def to_dict(self) -> dict:
        return {
            "version": SCENARIO_FORMAT_VERSION,
            "seed": self.seed,
            "capacity_setting": self.capacity_setting,
            "truck_cost": self.truck_cost,
            "schedules": [
                {
                    "id": s.id,
                    "depart_day": s.depart_day,
                    "arrive_day": s.arrive_day,
                    "capacity": s.capacity,
                    "cost": s.cost_per_container,
                }
                for s in self.schedules
            ],
            "containers": [
                {"id": c.id, "earliest_day": c.earliest_day, "due_day": c.due_day}
                for c in self.containers
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "WeekScenario":
        if doc.get("version", SCENARIO_FORMAT_VERSION) != SCENARIO_FORMAT_VERSION:
            raise ValueError(f"unsupported scenario version {doc.get('version')}")
        schedules = [
            TrainSchedule(s["id"], s["depart_day"], s["arrive_day"], s["capacity"], s["cost"])
            for s in doc["schedules"]
        ]
        containers = [Container(c["id"], c["earliest_day"], c["due_day"]) for c in doc["containers"]]
        return cls(
            schedules,
            containers,
            truck_cost=doc["truck_cost"],
            seed=doc.get("seed"),
            capacity_setting=doc.get("capacity_setting"),
        )

    @classmethod
    def from_json(cls, text: str) -> "WeekScenario":
        return cls.from_dict(json.loads(text))


def is_eligible(container: Container, schedule: TrainSchedule, residual_capacity: int) -> bool:
    return (
        schedule.depart_day >= container.earliest_day
        and schedule.arrive_day <= container.due_day
        and residual_capacity >= 1
    )


def validate(assignment: Assignment, scenario: WeekScenario) -> None:
    """Raise ConstraintViolation if ``assignment`` is not a feasible plan."""
    known = {c.id for c in scenario.containers}
    for cid in assignment:
        if cid not in known:
            raise ConstraintViolation("coverage", f"unknown container {cid}", container_id=cid)
    used = [0] * len(scenario.schedules)
    for c in scenario.containers:
        if c.id not in assignment:
            raise ConstraintViolation("coverage", f"container {c.id} is unassigned", container_id=c.id)
        tid = assignment[c.id]
        if tid is TRUCK:
            continue
        if not 0 <= tid < len(scenario.schedules):
            raise ConstraintViolation("coverage", f"container {c.id} on unknown schedule {tid}", c.id, tid)
        s = scenario.schedules[tid]
        if s.depart_day < c.earliest_day:
            raise ConstraintViolation(
                "departure",
                f"container {c.id} available day {c.earliest_day} but schedule {tid} departs day {s.depart_day}",
                c.id,
                tid,
            )
        if s.arrive_day > c.due_day:
            raise ConstraintViolation(
                "arrival",
                f"container {c.id} due day {c.due_day} but schedule {tid} arrives day {s.arrive_day}",
                c.id,
                tid,
            )
        used[tid] += 1
    for s, n in zip(scenario.schedules, used):
        if n > s.capacity:
            raise ConstraintViolation(
                "capacity", f"schedule {s.id} carries {n} > capacity {s.capacity}", schedule_id=s.id
            )


def total_cost(assignment: Assignment, scenario: WeekScenario) -> int:
    validate(assignment, scenario)
    cost = 0
    for tid in assignment.values():
        if tid is TRUCK:
            cost += scenario.truck_cost
        else:
            cost += scenario.schedules[tid].cost_per_container
    return cost


def utilization(assignment: Assignment, scenario: WeekScenario) -> Tuple[int, float]:
    """Return (used train slots, used / total weekly capacity)."""
    validate(assignment, scenario)
    used = sum(1 for tid in assignment.values() if tid is not TRUCK)
    cap = scenario.total_capacity
    if cap == 0:
        return used, 1.0
    return used, used / cap


def assignment_to_json(assignment: Assignment) -> list:
    """Serializable form: list of {container, vehicle} with vehicle "truck" or a schedule id."""
    return [
        {"container": cid, "vehicle": "truck" if tid is TRUCK else tid}
        for cid, tid in sorted(assignment.items())
    ]


def assignment_from_json(rows: Iterable[dict]) -> Assignment:
    return {r["container"]: (TRUCK if r["vehicle"] == "truck" else int(r["vehicle"])) for r in rows}


def make_scenario(
    caps: Sequence[int],
    containers: Sequence[Tuple[int, int]],
    truck_cost: int = DEFAULT_TRUCK_COST,
    train_costs: Optional[Sequence[int]] = None,
    pairs: Optional[Sequence[Tuple[int, int]]] = None,
) -> WeekScenario:
    """Small-instance helper: ``containers`` are (earliest, due) pairs, ids in order."""
    pairs = list(pairs) if pairs is not None else week_pairs()[: len(caps)]
    costs = list(train_costs) if train_costs is not None else [DEFAULT_TRAIN_COST] * len(caps)
    schedules = [
        TrainSchedule(i, d, a, cap, cost) for i, ((d, a), cap, cost) in enumerate(zip(pairs, caps, costs))
    ]
    return WeekScenario(schedules, [Container(i, e, l) for i, (e, l) in enumerate(containers)], truck_cost)
