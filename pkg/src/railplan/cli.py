"""Command-line entry point: ``railplan {generate,solve,plan,train,bench}``.

Every subcommand accepts ``--config FILE`` (JSON). Values from the file
replace the built-in defaults and explicit flags replace both.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from . import __version__
from .agent import TrainingConfig, read_stats_csv, stats_csv, train
from .bench import (
    METHODS,
    MissingCheckpoint,
    PlannerOptions,
    evaluate,
    plan,
    raw_weeks_jsonl,
    report_csv,
    training_curves,
)
from .domain import CostModel, WeekScenario, assignment_to_json, total_cost, utilization
from .neural import load_checkpoint, save_checkpoint
from .scenario import CAPACITY_SETTINGS, GeneratorConfig, generate_week, parse_capacity

log = logging.getLogger("railplan")


@dataclass
class GeneratorSection:
    capacity: str = "random"
    containers_per_week: int = 100
    truck_cost: int = 500
    train_cost: int = 15
    allow_same_day_due: bool = True


@dataclass
class TrainingSection:
    episodes: int = 4000
    update_every: int = 20
    batch_size: int = 10
    gamma: float = 0.99
    lr: float = 0.01
    hidden: List[int] = field(default_factory=lambda: [100, 100])
    replay_capacity: int = 10_000
    epsilon_start: float = 0.95
    epsilon_end: float = 0.05
    epsilon_schedule: str = "linear"
    epsilon_decay_fraction: float = 0.5
    epsilon_step: float = 0.1
    reward_scale: float = 1.0 / 500
    reward_offset: float = 0.0
    target_sync: int = 0
    heuristic: str = "fifo"


@dataclass
class ReplanSection:
    greedy_heuristic: str = "fifo"
    two_ilp_days: List[int] = field(default_factory=lambda: [1, 4])
    seven_ilp_days: List[int] = field(default_factory=lambda: list(range(1, 8)))
    departed_rule: bool = True


@dataclass
class BenchSection:
    weeks: int = 200
    quick_weeks: int = 20
    quick_episodes: int = 400
    capacities: List[str] = field(default_factory=lambda: ["random"])
    methods: List[str] = field(default_factory=lambda: list(METHODS))
    workers: int = 1


@dataclass
class PathsSection:
    out_dir: str = "bench_out"
    report: str = "report.csv"
    curves: str = "curves_{heuristic}.csv"
    raw_weeks: str = "raw_weeks.jsonl"
    # where bench looks for / stores trained networks; None keeps them in memory
    checkpoint_dir: Optional[str] = None


@dataclass
class RunConfig:
    seed: int = 0
    generator: GeneratorSection = field(default_factory=GeneratorSection)
    training: TrainingSection = field(default_factory=TrainingSection)
    replan: ReplanSection = field(default_factory=ReplanSection)
    bench: BenchSection = field(default_factory=BenchSection)
    paths: PathsSection = field(default_factory=PathsSection)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        cfg = cls()
        _merge(cfg, doc, "")
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(doc, dict):
            raise ValueError(f"{path}: top level must be an object")
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def validate(self) -> None:
        self.generator.capacity = parse_capacity(self.generator.capacity)
        self.bench.capacities = [parse_capacity(c) for c in self.bench.capacities]
        for m in self.bench.methods:
            if m not in METHODS:
                raise ValueError(f"bench.methods: unknown method {m!r}")
        self.training_config()  # raises on bad training values

    def cost_model(self) -> CostModel:
        return CostModel(self.generator.truck_cost, self.generator.train_cost)

    def generator_config(self, seed: Optional[int] = None) -> GeneratorConfig:
        g = self.generator
        return GeneratorConfig(
            g.capacity, g.containers_per_week, self.cost_model(), self.seed if seed is None else seed, g.allow_same_day_due
        )

    def training_config(self, **overrides) -> TrainingConfig:
        kw = dataclasses.asdict(self.training)
        kw["hidden"] = tuple(kw["hidden"])
        g = self.generator
        kw.update(
            capacity=g.capacity,
            containers_per_week=g.containers_per_week,
            truck_cost=g.truck_cost,
            train_cost=g.train_cost,
            allow_same_day_due=g.allow_same_day_due,
            seed=self.seed,
        )
        kw.update(overrides)
        return TrainingConfig(**kw)

    def planner_options(self) -> PlannerOptions:
        r = self.replan
        return PlannerOptions(r.greedy_heuristic, tuple(r.two_ilp_days), tuple(r.seven_ilp_days), r.departed_rule)


def _merge(obj, doc: dict, prefix: str) -> None:
    known = {f.name: f for f in dataclasses.fields(obj)}
    for key, value in doc.items():
        name = f"{prefix}{key}"
        if key not in known:
            raise ValueError(f"unknown config key {name!r}")
        current = getattr(obj, key)
        if dataclasses.is_dataclass(current):
            if not isinstance(value, dict):
                raise ValueError(f"config section {name!r} must be an object")
            _merge(current, value, name + ".")
        else:
            setattr(obj, key, value)


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _plan_report(assignment, scenario: WeekScenario) -> str:
    used, frac = utilization(assignment, scenario)
    doc = {
        "cost": total_cost(assignment, scenario),
        "used_slots": used,
        "total_slots": scenario.total_capacity,
        "utilization": frac,
        "assignment": assignment_to_json(assignment),
    }
    return json.dumps(doc, indent=2) + "\n"


def cmd_generate(cfg: RunConfig, args) -> int:
    scenario = generate_week(cfg.generator_config())
    _write(args.out, scenario.to_json())
    return 0


def cmd_solve(cfg: RunConfig, args) -> int:
    scenario = WeekScenario.from_json(Path(args.scenario).read_text())
    _write(args.out, _plan_report(plan("optimal", scenario), scenario))
    return 0


PLAN_METHODS = {
    "first": "first-train",
    "cheapest": "cheapest-train",
    "2ilp": "2-ilp",
    "7ilp": "7-ilp",
    "optimal": "optimal",
    "drl": None,
}


def cmd_plan(cfg: RunConfig, args) -> int:
    scenario = WeekScenario.from_json(Path(args.scenario).read_text())
    options = cfg.planner_options()
    if args.heuristic:
        options.greedy_heuristic = args.heuristic
    networks = None
    method = PLAN_METHODS[args.method]
    if method is None:
        if not args.load:
            raise ValueError("--method drl needs --load CHECKPOINT")
        net, _, meta = load_checkpoint(args.load)
        heuristic = args.heuristic or meta.get("heuristic") or cfg.training.heuristic
        method = f"drl-{heuristic}"
        networks = {heuristic: net}
    _write(args.out, _plan_report(plan(method, scenario, networks, options), scenario))
    return 0


def cmd_train(cfg: RunConfig, args) -> int:
    episodes = cfg.training.episodes
    if args.episodes is not None:
        episodes = args.episodes
    elif args.quick:
        episodes = cfg.bench.quick_episodes
    tc = cfg.training_config(episodes=episodes)

    def progress(st):
        if st.episode % 100 == 0 or st.episode == tc.episodes - 1:
            log.info("episode %d cost %d gap %d eps %.3f", st.episode, st.episode_cost, st.cost_gap, st.epsilon)

    result = train(tc, progress)
    if args.stats:
        Path(args.stats).write_text(stats_csv(result.stats))
    if args.save:
        save_checkpoint(args.save, result.net, result.adam, _checkpoint_meta(tc))
    curves = training_curves(result.stats)
    print(json.dumps({"episodes": len(result.stats), "updates": result.updates, "slopes": curves.slopes}))
    return 0


def _checkpoint_meta(tc: TrainingConfig) -> dict:
    meta = dataclasses.asdict(tc)
    meta["hidden"] = list(tc.hidden)
    return meta


def _bench_networks(cfg: RunConfig, capacity: str, episodes: int, may_train: bool) -> Tuple[dict, dict]:
    """Trained networks and their stats for both heuristics at one capacity setting."""
    networks, stats = {}, {}
    ckdir = Path(cfg.paths.checkpoint_dir) if cfg.paths.checkpoint_dir else None
    for heuristic in ("fifo", "edf"):
        if f"drl-{heuristic}" not in cfg.bench.methods:
            continue
        ck = ckdir / f"drl-{heuristic}-{capacity}.json" if ckdir else None
        st = ckdir / f"stats-{heuristic}-{capacity}.csv" if ckdir else None
        if ck is not None and ck.exists():
            networks[heuristic], _, _ = load_checkpoint(ck)
            if st.exists():
                stats[heuristic] = read_stats_csv(st.read_text())
            continue
        if not may_train:
            raise MissingCheckpoint(f"drl-{heuristic}: checkpoint {ck} not found")
        tc = cfg.training_config(heuristic=heuristic, capacity=capacity, episodes=episodes)
        log.info("training drl-%s, capacity %s, %d episodes", heuristic, capacity, episodes)
        result = train(tc)
        networks[heuristic], stats[heuristic] = result.net, result.stats
        if ckdir is not None:
            ckdir.mkdir(parents=True, exist_ok=True)
            save_checkpoint(ck, result.net, result.adam, _checkpoint_meta(tc))
            st.write_text(stats_csv(result.stats))
    return networks, stats


def cmd_bench(cfg: RunConfig, args) -> int:
    weeks = args.weeks if args.weeks is not None else (cfg.bench.quick_weeks if args.quick else cfg.bench.weeks)
    if args.episodes is not None:
        episodes = args.episodes
    else:
        episodes = cfg.bench.quick_episodes if args.quick else cfg.training.episodes
    out = Path(cfg.paths.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    curve_rows = {"fifo": [], "edf": []}
    for capacity in cfg.bench.capacities:
        networks, stats = _bench_networks(cfg, capacity, episodes, not args.eval_only)
        for heuristic, log_ in stats.items():
            curves = training_curves(log_)
            curve_rows[heuristic].append((capacity, curves))
            log.info("drl-%s capacity %s slopes %s", heuristic, capacity, curves.slopes)
        log.info("evaluating %d weeks, capacity %s", weeks, capacity)
        rep = evaluate(
            cfg.bench.methods,
            capacity,
            weeks,
            cfg.seed,
            networks,
            cfg.planner_options(),
            cfg.generator.containers_per_week,
            cfg.cost_model(),
            cfg.bench.workers,
        )
        reports.append(rep)
    (out / cfg.paths.report).write_text(report_csv(reports))
    (out / cfg.paths.raw_weeks).write_text(raw_weeks_jsonl(reports))
    for heuristic, rows in curve_rows.items():
        if rows:
            (out / cfg.paths.curves.format(heuristic=heuristic)).write_text(_curves_csv(rows))
    sys.stdout.write(report_csv(reports))
    return 0


def _curves_csv(rows) -> str:
    """One CSV per heuristic; a capacity column separates the settings and
    trailing ``#slope`` rows carry the fitted slopes."""
    lines = []
    for i, (capacity, curves) in enumerate(rows):
        body = curves.to_csv().splitlines()
        if i == 0:
            lines.append("capacity," + body[0])
        lines.extend(f"{capacity},{line}" for line in body[1:])
    for capacity, curves in rows:
        for name, slope in curves.slopes.items():
            lines.append(f"#slope,{capacity},{name},{slope!r}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="base seed for every random component")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = argparse.ArgumentParser(prog="railplan", description="Weekly rail/truck container planning.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write a random week as JSON")
    p.add_argument("--capacity", choices=CAPACITY_SETTINGS)
    p.add_argument("--containers", type=int, help="containers per week")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", parents=[common], help="optimal offline plan for a week file")
    p.add_argument("scenario", help="week JSON from 'generate'")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("plan", parents=[common], help="plan a week file with one method")
    p.add_argument("scenario", help="week JSON from 'generate'")
    p.add_argument("--method", required=True, choices=list(PLAN_METHODS))
    p.add_argument("--heuristic", choices=["fifo", "edf"], help="container order for greedy and drl methods")
    p.add_argument("--load", help="checkpoint for --method drl")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("train", parents=[common], help="train a Q-network planner")
    p.add_argument("--heuristic", choices=["fifo", "edf"])
    p.add_argument("--capacity", choices=CAPACITY_SETTINGS)
    p.add_argument("--episodes", type=int)
    p.add_argument("--save", help="checkpoint path")
    p.add_argument("--stats", help="per-episode stats CSV path")
    p.add_argument("--quick", action="store_true", help="short run (bench.quick_episodes) unless --episodes is set")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("bench", parents=[common], help="train and compare all planners")
    p.add_argument("--capacity", action="append", choices=CAPACITY_SETTINGS + ("all",), help="repeatable; 'all' = every setting")
    p.add_argument("--weeks", type=int, help="evaluation weeks per setting")
    p.add_argument("--episodes", type=int, help="training episodes per network")
    p.add_argument("--methods", help="comma-separated subset of " + ",".join(METHODS))
    p.add_argument("--out-dir")
    p.add_argument("--checkpoint-dir")
    p.add_argument("--workers", type=int)
    p.add_argument("--eval-only", action="store_true", help="fail instead of training when a checkpoint is missing")
    p.add_argument("--quick", action="store_true", help="bench.quick_weeks weeks and bench.quick_episodes episodes")
    p.set_defaults(func=cmd_bench)
    return parser


def apply_overrides(cfg: RunConfig, args) -> None:
    get = lambda name: getattr(args, name, None)  # noqa: E731
    if get("seed") is not None:
        cfg.seed = args.seed
    if get("capacity") is not None:
        if args.command == "bench":
            caps = list(CAPACITY_SETTINGS) if "all" in args.capacity else args.capacity
            cfg.bench.capacities = list(dict.fromkeys(caps))
        else:
            cfg.generator.capacity = args.capacity
    if get("containers") is not None:
        cfg.generator.containers_per_week = args.containers
    if args.command == "train" and get("heuristic") is not None:
        cfg.training.heuristic = args.heuristic
    if get("methods") is not None:
        cfg.bench.methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if get("out_dir") is not None:
        cfg.paths.out_dir = args.out_dir
    if get("checkpoint_dir") is not None:
        cfg.paths.checkpoint_dir = args.checkpoint_dir
    if get("workers") is not None:
        cfg.bench.workers = args.workers
    cfg.validate()


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        apply_overrides(cfg, args)
        return args.func(cfg, args)
    except (ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"railplan {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
