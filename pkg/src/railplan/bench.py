"""Benchmark harness: paired evaluation of all planners on held-out weeks,
plus training-curve summaries."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from .agent import EpisodeStats, act_greedy
from .baselines import TWO_ILP_DAYS, SEVEN_ILP_DAYS, cheapest_train, first_train, k_ilp
from .domain import CostModel, WeekScenario, total_cost, utilization
from .exact import solve_optimal
from .neural import QNetwork
from .scenario import GeneratorConfig, generate_week, parse_capacity, week_seeds

EVAL_STREAM = 1

METHODS = ("drl-fifo", "drl-edf", "optimal", "2-ilp", "7-ilp", "first-train", "cheapest-train")
DRL_METHODS = {"drl-fifo": "fifo", "drl-edf": "edf"}

REPORT_COLUMNS = (
    "method",
    "capacity",
    "weeks",
    "cost_mean",
    "cost_std",
    "utilization_mean",
    "utilization_std",
    "cost_diff_pct",
    "utilization_diff_pp",
    "utilization_diff_rel_pct",
)


class MissingCheckpoint(KeyError):
    pass


@dataclass
class PlannerOptions:
    """Knobs for the non-learning planners."""

    greedy_heuristic: str = "fifo"
    two_ilp_days: Sequence[int] = TWO_ILP_DAYS
    seven_ilp_days: Sequence[int] = SEVEN_ILP_DAYS
    departed_rule: bool = True


def plan(method: str, scenario: WeekScenario, networks: Mapping[str, QNetwork] = None, options: PlannerOptions = None):
    """Run one named planner on one week and return its assignment."""
    options = options or PlannerOptions()
    if method in DRL_METHODS:
        heuristic = DRL_METHODS[method]
        if not networks or heuristic not in networks:
            raise MissingCheckpoint(f"{method}: no trained network for heuristic {heuristic!r}")
        return act_greedy(networks[heuristic], scenario, heuristic)
    if method == "optimal":
        return solve_optimal(scenario)[0]
    if method == "2-ilp":
        return k_ilp(scenario, options.two_ilp_days, departed_rule=options.departed_rule)
    if method == "7-ilp":
        return k_ilp(scenario, options.seven_ilp_days, departed_rule=options.departed_rule)
    if method == "first-train":
        return first_train(scenario, options.greedy_heuristic)
    if method == "cheapest-train":
        return cheapest_train(scenario, options.greedy_heuristic)
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")


@dataclass
class WeekResult:
    week: int
    seed: int
    method: str
    cost: int
    used_slots: int
    utilization: float

    def to_json(self, capacity: str) -> str:
        return json.dumps(
            {
                "capacity": capacity,
                "week": self.week,
                "seed": self.seed,
                "method": self.method,
                "cost": self.cost,
                "used_slots": self.used_slots,
                "utilization": self.utilization,
            }
        )


@dataclass
class MethodSummary:
    method: str
    capacity: str
    weeks: int
    cost_mean: float
    cost_std: float
    utilization_mean: float
    utilization_std: float
    cost_diff_pct: float = 0.0
    utilization_diff_pp: float = 0.0
    utilization_diff_rel_pct: float = 0.0

    def row(self) -> list:
        return [
            self.method,
            self.capacity,
            self.weeks,
            repr(self.cost_mean),
            repr(self.cost_std),
            repr(self.utilization_mean),
            repr(self.utilization_std),
            repr(self.cost_diff_pct),
            repr(self.utilization_diff_pp),
            repr(self.utilization_diff_rel_pct),
        ]


@dataclass
class EvaluationReport:
    capacity: str
    summaries: Dict[str, MethodSummary]
    weeks: List[WeekResult] = field(default_factory=list)

    def __getitem__(self, method: str) -> MethodSummary:
        return self.summaries[method]

    def costs(self, method: str) -> np.ndarray:
        return np.array([w.cost for w in self.weeks if w.method == method])


def _evaluate_week(args) -> List[WeekResult]:
    week, seed, capacity, containers, cost_model, methods, networks, options = args
    scenario = generate_week(GeneratorConfig(capacity, containers, cost_model, seed))
    out = []
    for method in methods:
        assignment = plan(method, scenario, networks, options)
        used, frac = utilization(assignment, scenario)
        out.append(WeekResult(week, seed, method, total_cost(assignment, scenario), used, frac))
    return out


def evaluate(
    methods: Sequence[str] = METHODS,
    capacity="random",
    weeks: int = 200,
    seed: int = 0,
    networks: Optional[Mapping[str, QNetwork]] = None,
    options: Optional[PlannerOptions] = None,
    containers_per_week: int = 100,
    cost_model: Optional[CostModel] = None,
    workers: int = 1,
) -> EvaluationReport:
    """Run every method on the same ``weeks`` held-out scenarios and aggregate.

    ``optimal`` is always evaluated because the differences are relative to it.
    """
    capacity = parse_capacity(capacity)
    methods = list(dict.fromkeys(methods))
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
        if m in DRL_METHODS and (not networks or DRL_METHODS[m] not in networks):
            raise MissingCheckpoint(f"{m}: no trained network for heuristic {DRL_METHODS[m]!r}")
    if "optimal" not in methods:
        methods.append("optimal")
    options = options or PlannerOptions()
    cost_model = cost_model or CostModel()
    seeds = week_seeds(seed, weeks, EVAL_STREAM)
    jobs = [(i, s, capacity, containers_per_week, cost_model, methods, networks, options) for i, s in enumerate(seeds)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_week = list(pool.map(_evaluate_week, jobs, chunksize=max(1, weeks // (4 * workers))))
    else:
        per_week = [_evaluate_week(job) for job in jobs]
    results = [r for rows in per_week for r in rows]
    return summarize(results, capacity, methods)


def summarize(results: Sequence[WeekResult], capacity: str, methods: Sequence[str]) -> EvaluationReport:
    summaries = {}
    for m in methods:
        costs = np.array([r.cost for r in results if r.method == m], dtype=np.float64)
        utils = np.array([r.utilization for r in results if r.method == m], dtype=np.float64)
        ddof = 1 if len(costs) > 1 else 0
        summaries[m] = MethodSummary(
            m,
            capacity,
            len(costs),
            float(costs.mean()),
            float(costs.std(ddof=ddof)),
            float(utils.mean()),
            float(utils.std(ddof=ddof)),
        )
    opt = summaries["optimal"]
    for s in summaries.values():
        s.cost_diff_pct = (s.cost_mean - opt.cost_mean) / opt.cost_mean * 100 if opt.cost_mean else 0.0
        s.utilization_diff_pp = (s.utilization_mean - opt.utilization_mean) * 100
        s.utilization_diff_rel_pct = (
            (s.utilization_mean - opt.utilization_mean) / opt.utilization_mean * 100 if opt.utilization_mean else 0.0
        )
    return EvaluationReport(capacity, summaries, list(results))


def report_csv(reports: Sequence[EvaluationReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for rep in reports:
        for s in rep.summaries.values():
            writer.writerow(s.row())
    return buf.getvalue()


def raw_weeks_jsonl(reports: Sequence[EvaluationReport]) -> str:
    return "".join(w.to_json(rep.capacity) + "\n" for rep in reports for w in rep.weeks)


def ls_slope(y) -> float:
    """Least-squares slope of ``y`` against 0..n-1."""
    y = np.asarray(y, dtype=np.float64)
    if len(y) < 2:
        return 0.0
    x = np.arange(len(y), dtype=np.float64)
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


CURVE_SERIES = ("mean_reward", "reward_variance", "cost_gap")


@dataclass
class TrainingCurves:
    episodes: np.ndarray
    series: Dict[str, np.ndarray]
    slopes: Dict[str, float]

    def trend(self, name: str) -> np.ndarray:
        y = self.series[name]
        x = np.arange(len(y), dtype=np.float64)
        return y.mean() + self.slopes[name] * (x - x.mean()) if len(y) else y

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["episode", *CURVE_SERIES, *(f"{n}_trend" for n in CURVE_SERIES)])
        trends = [self.trend(n) for n in CURVE_SERIES]
        for i, ep in enumerate(self.episodes):
            writer.writerow([int(ep), *(repr(float(self.series[n][i])) for n in CURVE_SERIES), *(repr(float(t[i])) for t in trends)])
        return buf.getvalue()


def training_curves(stats: Sequence[EpisodeStats]) -> TrainingCurves:
    series = {
        "mean_reward": np.array([s.mean_reward for s in stats], dtype=np.float64),
        "reward_variance": np.array([s.reward_variance for s in stats], dtype=np.float64),
        "cost_gap": np.array([s.cost_gap for s in stats], dtype=np.float64),
    }
    return TrainingCurves(
        np.array([s.episode for s in stats]),
        series,
        {name: ls_slope(y) for name, y in series.items()},
    )
