"""Weekly container planning across rail schedules and trucks."""

__version__ = "0.1.0"

from .domain import (  # noqa: E402
    ConstraintViolation,
    Container,
    CostModel,
    TrainSchedule,
    WeekScenario,
    total_cost,
    utilization,
    validate,
)
from .scenario import GeneratorConfig, generate_week  # noqa: E402

__all__ = [
    "ConstraintViolation",
    "Container",
    "CostModel",
    "GeneratorConfig",
    "TrainSchedule",
    "WeekScenario",
    "generate_week",
    "total_cost",
    "utilization",
    "validate",
]
