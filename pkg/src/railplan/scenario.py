"""Seeded generator of weekly planning scenarios.

Randomness comes from numpy's PCG64 bit generator (``numpy.random.default_rng``),
one stream per week seed. Draw order within a stream is fixed:

1. schedule capacities, 28 draws, only for the ``random`` capacity setting;
2. all container earliest days, one vectorised draw;
3. all container due days, one vectorised draw.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .domain import DAYS, Container, CostModel, TrainSchedule, WeekScenario, week_pairs

MAX_CAPACITY = 6
CAPACITY_SETTINGS = ("1", "2", "3", "4", "5", "6", "random")


def parse_capacity(value: Union[int, str]) -> str:
    """Normalise a capacity setting to one of CAPACITY_SETTINGS."""
    text = str(value).strip().lower()
    if text not in CAPACITY_SETTINGS:
        raise ValueError(f"capacity setting must be 1..{MAX_CAPACITY} or 'random', got {value!r}")
    return text


@dataclass(frozen=True)
class GeneratorConfig:
    capacity: str = "random"
    containers_per_week: int = 100
    cost_model: CostModel = field(default_factory=CostModel)
    seed: int = 0
    # due day drawn from earliest..7 when True, else earliest+1..7 (clamped at 7)
    allow_same_day_due: bool = True

    def __post_init__(self):
        object.__setattr__(self, "capacity", parse_capacity(self.capacity))
        if self.containers_per_week < 0:
            raise ValueError("containers_per_week must be >= 0")


def generate_week(config: GeneratorConfig) -> WeekScenario:
    rng = np.random.default_rng(config.seed)
    pairs = week_pairs()
    if config.capacity == "random":
        caps = rng.integers(0, MAX_CAPACITY + 1, size=len(pairs))
    else:
        caps = np.full(len(pairs), int(config.capacity))
    schedules = [
        TrainSchedule(i, d, a, int(caps[i]), config.cost_model.cost_for(i)) for i, (d, a) in enumerate(pairs)
    ]

    n = config.containers_per_week
    earliest = rng.integers(1, DAYS + 1, size=n)
    low = earliest if config.allow_same_day_due else np.minimum(earliest + 1, DAYS)
    due = rng.integers(low, DAYS + 1)
    containers = [Container(i, int(e), int(l)) for i, (e, l) in enumerate(zip(earliest, due))]
    return WeekScenario(
        schedules,
        containers,
        truck_cost=config.cost_model.truck_cost,
        seed=config.seed,
        capacity_setting=config.capacity,
    )


def week_seeds(base_seed: int, count: int, stream: int = 0) -> list:
    """Independent per-week seeds derived from ``base_seed``; ``stream`` separates train/eval sets."""
    seq = np.random.SeedSequence([base_seed, stream])
    return [int(s.generate_state(1, dtype=np.uint64)[0]) for s in seq.spawn(count)]
