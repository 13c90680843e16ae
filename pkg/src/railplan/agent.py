"""Deep Q-learning planner: masked epsilon-greedy acting, replay memory and
periodic minibatch Bellman updates over freshly generated weeks."""

from __future__ import annotations

import csv
import io
import logging
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .domain import CostModel, WeekScenario
from .env import WEEK_ARRIVE, WEEK_DEPART, Heuristic, PlanningEnv, PlanState, Transition, action_mask
from .exact import solve_optimal
from .neural import Adam, NonFiniteLoss, QNetwork, train_batch
from .scenario import GeneratorConfig, generate_week, parse_capacity, week_seeds

log = logging.getLogger(__name__)

TRAIN_STREAM = 0
AGENT_STREAM = 2

STATS_COLUMNS = (
    "episode",
    "mean_reward",
    "reward_variance",
    "episode_cost",
    "optimal_cost",
    "cost_gap",
    "epsilon",
)


class ReplayMemory:
    """Fixed-size FIFO of transitions; oldest entries are evicted first."""

    def __init__(self, capacity: int = 10_000):
        if capacity < 1:
            raise ValueError("replay capacity must be positive")
        self.capacity = capacity
        self.buffer: deque = deque(maxlen=capacity)
        self.inserted = 0

    def __len__(self) -> int:
        return len(self.buffer)

    def append(self, transition: Transition) -> None:
        self.buffer.append(transition)
        self.inserted += 1

    def sample(self, k: int, rng: np.random.Generator) -> List[Transition]:
        """Uniform sample without replacement."""
        if k > len(self.buffer):
            raise ValueError(f"cannot sample {k} from {len(self.buffer)} transitions")
        idx = rng.choice(len(self.buffer), size=k, replace=False)
        return [self.buffer[i] for i in idx]


@dataclass
class TrainingConfig:
    episodes: int = 4000
    update_every: int = 20
    batch_size: int = 10
    gamma: float = 0.99
    lr: float = 0.01
    hidden: Tuple[int, ...] = (100, 100)
    replay_capacity: int = 10_000
    epsilon_start: float = 0.95
    epsilon_end: float = 0.05
    # "linear": reach epsilon_end after epsilon_decay_fraction of the episodes;
    # "step": subtract epsilon_step after every episode
    epsilon_schedule: str = "linear"
    epsilon_decay_fraction: float = 0.5
    epsilon_step: float = 0.1
    # Bellman targets use reward * reward_scale + reward_offset; with a fixed
    # episode length the offset shifts every action's value equally
    reward_scale: float = 1.0 / 500
    reward_offset: float = 0.0
    # 0 bootstraps from the live network; N > 0 syncs a frozen copy every N updates
    target_sync: int = 0
    heuristic: str = "fifo"
    capacity: str = "random"
    containers_per_week: int = 100
    truck_cost: int = 500
    train_cost: int = 15
    allow_same_day_due: bool = True
    seed: int = 0

    def __post_init__(self):
        self.heuristic = Heuristic(self.heuristic).value
        self.capacity = parse_capacity(self.capacity)
        self.hidden = tuple(int(h) for h in self.hidden)
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")
        if not 0.0 <= self.epsilon_end <= self.epsilon_start <= 1.0:
            raise ValueError("need 0 <= epsilon_end <= epsilon_start <= 1")
        if self.epsilon_schedule not in ("linear", "step"):
            raise ValueError(f"unknown epsilon schedule {self.epsilon_schedule!r}")
        for name in ("episodes", "update_every", "batch_size", "replay_capacity"):
            if getattr(self, name) < (0 if name == "episodes" else 1):
                raise ValueError(f"{name} out of range")

    @property
    def cost_model(self) -> CostModel:
        return CostModel(truck_cost=self.truck_cost, train_cost=self.train_cost)

    def epsilon(self, episode: int) -> float:
        """Exploration rate used during ``episode`` (0-based)."""
        if self.epsilon_schedule == "step":
            eps = self.epsilon_start - self.epsilon_step * episode
        else:
            horizon = max(1.0, self.epsilon_decay_fraction * self.episodes)
            frac = min(1.0, episode / horizon)
            eps = self.epsilon_start + frac * (self.epsilon_end - self.epsilon_start)
        return float(min(self.epsilon_start, max(self.epsilon_end, eps)))


@dataclass
class EpisodeStats:
    episode: int
    total_reward: int
    mean_reward: float
    reward_variance: float
    episode_cost: int
    optimal_cost: int
    epsilon: float

    @property
    def cost_gap(self) -> int:
        return self.episode_cost - self.optimal_cost

    def row(self) -> list:
        return [
            self.episode,
            repr(self.mean_reward),
            repr(self.reward_variance),
            self.episode_cost,
            self.optimal_cost,
            self.cost_gap,
            repr(self.epsilon),
        ]


def stats_csv(stats: Sequence[EpisodeStats]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(STATS_COLUMNS)
    for s in stats:
        writer.writerow(s.row())
    return buf.getvalue()


def read_stats_csv(text: str) -> List[EpisodeStats]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        cost = int(row["episode_cost"])
        out.append(
            EpisodeStats(
                episode=int(row["episode"]),
                total_reward=-cost,
                mean_reward=float(row["mean_reward"]),
                reward_variance=float(row["reward_variance"]),
                episode_cost=cost,
                optimal_cost=int(row["optimal_cost"]),
                epsilon=float(row["epsilon"]),
            )
        )
    return out


def select_action(net: QNetwork, state: PlanState, eligible, epsilon: float, rng: np.random.Generator) -> int:
    """Masked epsilon-greedy choice. ``eligible`` is a boolean vector or a set of action ids.

    One uniform draw is always consumed so the random stream does not depend
    on the network's outputs.
    """
    eligible = _as_mask(eligible, net.sizes[-1])
    ids = np.flatnonzero(eligible)
    if len(ids) == 0:
        raise ValueError("no eligible action")
    explore = rng.random() < epsilon
    if len(ids) == 1:
        return int(ids[0])
    if explore:
        return int(ids[rng.integers(len(ids))])
    q = net.forward(state.features())
    q = np.where(eligible, q, -np.inf)
    return int(np.argmax(q))


def _as_mask(eligible, n: int) -> np.ndarray:
    if isinstance(eligible, np.ndarray) and eligible.dtype == bool:
        return eligible
    out = np.zeros(n, dtype=bool)
    out[list(eligible)] = True
    return out


def bellman_target(
    transition: Transition,
    net: QNetwork,
    gamma: float,
    reward_scale: float = 1.0,
    reward_offset: float = 0.0,
    depart=WEEK_DEPART,
    arrive=WEEK_ARRIVE,
) -> float:
    """r (scaled) plus the discounted best allowed Q-value of the next state; r alone at the end."""
    r = transition.reward * reward_scale + reward_offset
    if transition.terminal:
        return r
    nxt = transition.next_state
    q = net.forward(nxt.features())
    mask = action_mask(nxt, depart, arrive)
    return r + gamma * float(np.max(q[mask]))


def bellman_targets(
    batch: Sequence[Transition],
    net: QNetwork,
    gamma: float,
    reward_scale: float = 1.0,
    reward_offset: float = 0.0,
    depart=WEEK_DEPART,
    arrive=WEEK_ARRIVE,
) -> np.ndarray:
    """Vectorised ``bellman_target`` over a minibatch."""
    rewards = np.array([t.reward for t in batch], dtype=np.float64) * reward_scale + reward_offset
    live = [i for i, t in enumerate(batch) if not t.terminal]
    if live:
        feats = np.stack([batch[i].next_state.features() for i in live])
        masks = np.stack([action_mask(batch[i].next_state, depart, arrive) for i in live])
        q = np.where(masks, net.forward(feats), -np.inf)
        rewards[live] += gamma * q.max(axis=1)
    return rewards


def run_episode(
    env: PlanningEnv,
    net: QNetwork,
    epsilon: float,
    rng: np.random.Generator,
    on_step: Optional[Callable[[Transition], None]] = None,
) -> List[Transition]:
    state = env.reset()
    while state is not None:
        mask = env.mask_array(state)
        action = select_action(net, state, mask, epsilon, rng)
        assert mask[action], f"agent chose masked action {action}"
        tr = env.step(action)
        if on_step is not None:
            on_step(tr)
        state = tr.next_state
    return env.transitions


def act_greedy(net: QNetwork, scenario: WeekScenario, heuristic) -> dict:
    """Epsilon-zero rollout; returns the induced assignment."""
    env = PlanningEnv(scenario, heuristic)
    state = env.state
    while state is not None:
        mask = env.mask_array(state)
        q = np.where(mask, net.forward(state.features()), -np.inf)
        state = env.step(int(np.argmax(q))).next_state
    return env.assignment


@dataclass
class TrainingResult:
    net: QNetwork
    adam: Adam
    stats: List[EpisodeStats]
    updates: int
    losses: List[float] = field(default_factory=list)


def train(
    config: TrainingConfig,
    progress: Optional[Callable[[EpisodeStats], None]] = None,
    net: Optional[QNetwork] = None,
    adam: Optional[Adam] = None,
    on_transition: Optional[Callable[[Transition], None]] = None,
) -> TrainingResult:
    """Run ``config.episodes`` episodes, each on a freshly generated week.

    ``on_transition`` sees every transition as it is produced, before any
    network update triggered by that step.
    """
    rng = np.random.default_rng([config.seed, AGENT_STREAM])
    if net is None:
        net = QNetwork.for_planning(28, config.hidden, seed=int(rng.integers(2**63)))
    if adam is None:
        adam = Adam.for_network(net, lr=config.lr)
    target_net = net.copy() if config.target_sync else net
    replay = ReplayMemory(config.replay_capacity)
    seeds = week_seeds(config.seed, config.episodes, TRAIN_STREAM)
    stats: List[EpisodeStats] = []
    losses: List[float] = []
    steps = 0
    updates = 0

    for episode, week_seed in enumerate(seeds):
        scenario = generate_week(
            GeneratorConfig(
                config.capacity, config.containers_per_week, config.cost_model, week_seed, config.allow_same_day_due
            )
        )
        _, optimal = solve_optimal(scenario)
        env = PlanningEnv(scenario, config.heuristic)
        eps = config.epsilon(episode)

        def on_step(tr: Transition) -> None:
            nonlocal steps, updates, target_net
            if on_transition is not None:
                on_transition(tr)
            replay.append(tr)
            steps += 1
            if steps % config.update_every or len(replay) < config.batch_size:
                return
            batch = replay.sample(config.batch_size, rng)
            targets = bellman_targets(batch, target_net, config.gamma, config.reward_scale, config.reward_offset)
            x = np.stack([t.state.features() for t in batch])
            actions = np.array([t.action for t in batch])
            try:
                losses.append(train_batch(net, adam, x, actions, targets))
            except NonFiniteLoss as exc:
                raise NonFiniteLoss(
                    f"episode {episode}, step {steps}: {exc}", exc.inputs, exc.actions, exc.targets
                ) from exc
            updates += 1
            if config.target_sync and updates % config.target_sync == 0:
                target_net = net.copy()

        transitions = run_episode(env, net, eps, rng, on_step)
        rewards = np.array([t.reward for t in transitions], dtype=np.float64)
        cost = -int(rewards.sum())
        st = EpisodeStats(
            episode=episode,
            total_reward=-cost,
            mean_reward=float(rewards.mean()) if len(rewards) else 0.0,
            reward_variance=float(rewards.var()) if len(rewards) else 0.0,
            episode_cost=cost,
            optimal_cost=optimal,
            epsilon=eps,
        )
        stats.append(st)
        if progress is not None:
            progress(st)
    return TrainingResult(net, adam, stats, updates, losses)
