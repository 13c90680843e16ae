import numpy as np
import pytest

from railplan.domain import make_scenario
from railplan.scenario import GeneratorConfig, generate_week


@pytest.fixture
def week():
    return generate_week(GeneratorConfig(capacity="random", seed=11))


def random_small_scenario(rng: np.random.Generator, max_containers=6, max_schedules=4, max_cap=2, costs=False):
    """Tiny instance: up to 4 random (d, a) schedules and up to 6 containers."""
    n_sched = int(rng.integers(1, max_schedules + 1))
    pairs = []
    for _ in range(n_sched):
        d = int(rng.integers(1, 8))
        a = int(rng.integers(d, 8))
        pairs.append((d, a))
    caps = [int(c) for c in rng.integers(0, max_cap + 1, size=n_sched)]
    train_costs = [int(c) for c in rng.integers(5, 40, size=n_sched)] if costs else None
    containers = []
    for _ in range(int(rng.integers(0, max_containers + 1))):
        e = int(rng.integers(1, 8))
        containers.append((e, int(rng.integers(e, 8))))
    return make_scenario(caps, containers, train_costs=train_costs, pairs=pairs)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    """Record one acceptance line; the line is printed in the terminal summary."""

    def record(criterion: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append(f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
