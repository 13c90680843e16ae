"""Online planning environment: one container decided per step.

Actions 0..n-1 put the current container on schedule ``id``; action ``n``
(``env.truck_action``) sends it by truck. The truck is always allowed.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .domain import DAYS, TRUCK, Assignment, Container, WeekScenario, week_pairs
from .scenario import MAX_CAPACITY

WEEK_DEPART = np.array([d for d, _ in week_pairs()], dtype=np.int64)
WEEK_ARRIVE = np.array([a for _, a in week_pairs()], dtype=np.int64)


class Heuristic(str, enum.Enum):
    FIFO = "fifo"
    EDF = "edf"


class InfeasibleAction(ValueError):
    pass


def order_containers(containers: Sequence[Container], heuristic) -> List[Container]:
    """FIFO sorts on (earliest, due, id); EDF on (due, earliest, id)."""
    heuristic = Heuristic(heuristic)
    if heuristic is Heuristic.FIFO:
        key = lambda c: (c.earliest_day, c.due_day, c.id)
    else:
        key = lambda c: (c.due_day, c.earliest_day, c.id)
    return sorted(containers, key=key)


@dataclass(frozen=True, eq=False)
class PlanState:
    residual_caps: np.ndarray
    next_e: int
    next_l: int

    def features(self, cap_scale: float = MAX_CAPACITY, day_scale: float = DAYS) -> np.ndarray:
        """Network input: capacities / 6 followed by (e, l) / 7."""
        out = np.empty(len(self.residual_caps) + 2)
        out[:-2] = self.residual_caps / cap_scale
        out[-2] = self.next_e / day_scale
        out[-1] = self.next_l / day_scale
        return out


@dataclass(frozen=True, eq=False)
class Transition:
    state: PlanState
    action: int
    reward: int
    next_state: Optional[PlanState]  # None marks the terminal state

    @property
    def terminal(self) -> bool:
        return self.next_state is None


def action_mask(state: PlanState, depart=WEEK_DEPART, arrive=WEEK_ARRIVE) -> np.ndarray:
    """Allowed actions as a boolean vector: trains that depart on/after ``next_e``,
    arrive by ``next_l`` and have a free slot, plus the truck (last entry)."""
    out = np.empty(len(depart) + 1, dtype=bool)
    out[:-1] = (depart >= state.next_e) & (arrive <= state.next_l) & (state.residual_caps >= 1)
    out[-1] = True
    return out


class PlanningEnv:
    def __init__(self, scenario: WeekScenario, heuristic=Heuristic.FIFO):
        self.scenario = scenario
        self.heuristic = Heuristic(heuristic)
        self.depart = np.array([s.depart_day for s in scenario.schedules], dtype=np.int64)
        self.arrive = np.array([s.arrive_day for s in scenario.schedules], dtype=np.int64)
        self.initial_caps = np.array([s.capacity for s in scenario.schedules], dtype=np.int64)
        self.train_costs = np.array([s.cost_per_container for s in scenario.schedules], dtype=np.int64)
        self.truck_action = len(scenario.schedules)
        self.n_actions = len(scenario.schedules) + 1
        self.state: Optional[PlanState] = None
        self.reset()

    def reset(self) -> Optional[PlanState]:
        self.queue = order_containers(self.scenario.containers, self.heuristic)
        self.position = 0
        self.assignment: Assignment = {}
        self.transitions: List[Transition] = []
        caps = self.initial_caps.copy()
        caps.flags.writeable = False
        self.state = self._state_for(caps)
        return self.state

    def _state_for(self, caps: np.ndarray) -> Optional[PlanState]:
        if self.position >= len(self.queue):
            return None
        c = self.queue[self.position]
        return PlanState(caps, c.earliest_day, c.due_day)

    @property
    def done(self) -> bool:
        return self.state is None

    @property
    def current_container(self) -> Optional[Container]:
        return None if self.done else self.queue[self.position]

    def mask_array(self, state: PlanState) -> np.ndarray:
        return action_mask(state, self.depart, self.arrive)

    def mask(self, state: PlanState) -> frozenset:
        return frozenset(np.flatnonzero(self.mask_array(state)).tolist())

    def reward(self, action: int) -> int:
        if action == self.truck_action:
            return -self.scenario.truck_cost
        return -int(self.train_costs[action])

    def step(self, action: int) -> Transition:
        state = self.state
        if state is None:
            raise RuntimeError("episode is over; call reset()")
        action = int(action)
        if not 0 <= action < self.n_actions or not self.mask_array(state)[action]:
            raise InfeasibleAction(
                f"action {action} is not allowed for container (e={state.next_e}, l={state.next_l})"
            )
        caps = state.residual_caps
        if action != self.truck_action:
            caps = caps.copy()
            caps[action] -= 1
            caps.flags.writeable = False
        container = self.queue[self.position]
        self.assignment[container.id] = TRUCK if action == self.truck_action else action
        self.position += 1
        next_state = self._state_for(caps)
        tr = Transition(state, action, self.reward(action), next_state)
        self.transitions.append(tr)
        self.state = next_state
        return tr

    def trace_json(self) -> str:
        """Episode trace for debugging."""
        rows = []
        for tr in self.transitions:
            rows.append(
                {
                    "caps": tr.state.residual_caps.tolist(),
                    "e": tr.state.next_e,
                    "l": tr.state.next_l,
                    "action": tr.action,
                    "reward": tr.reward,
                    "terminal": tr.terminal,
                }
            )
        return json.dumps(rows)


def episode_cost(transitions: Sequence[Transition]) -> int:
    """Total cost of a finished episode (negated reward sum)."""
    if transitions and not transitions[-1].terminal:
        raise ValueError("episode is incomplete: last transition is not terminal")
    return -sum(tr.reward for tr in transitions)
