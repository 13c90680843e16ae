"""Fully-connected Q-network in plain numpy, trained with Adam.

Layout: input -> [Linear -> ReLU] * k -> Linear. Weights are stored (fan_in,
fan_out) and initialised uniform on +-1/sqrt(fan_in), biases likewise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

CHECKPOINT_FORMAT = "railplan-qnet"
CHECKPOINT_VERSION = 1


class NonFiniteLoss(FloatingPointError):
    def __init__(self, message: str, inputs=None, actions=None, targets=None):
        super().__init__(message)
        self.inputs = inputs
        self.actions = actions
        self.targets = targets


class QNetwork:
    def __init__(self, sizes: Sequence[int], params: Optional[List[np.ndarray]] = None, seed: Optional[int] = None):
        if len(sizes) < 2:
            raise ValueError("need at least an input and an output layer")
        self.sizes = tuple(int(s) for s in sizes)
        if params is None:
            rng = np.random.default_rng(seed)
            params = []
            for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
                bound = 1.0 / np.sqrt(fan_in)
                params.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
                params.append(rng.uniform(-bound, bound, size=fan_out))
        self.params = [np.asarray(p, dtype=np.float64) for p in params]
        for i, (fan_in, fan_out) in enumerate(zip(self.sizes[:-1], self.sizes[1:])):
            if self.params[2 * i].shape != (fan_in, fan_out) or self.params[2 * i + 1].shape != (fan_out,):
                raise ValueError(f"layer {i} parameter shapes do not match sizes {self.sizes}")

    @classmethod
    def for_planning(cls, n_schedules: int = 28, hidden: Sequence[int] = (100, 100), seed=None):
        return cls((n_schedules + 2, *hidden, n_schedules + 1), seed=seed)

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    def copy(self) -> "QNetwork":
        return QNetwork(self.sizes, [p.copy() for p in self.params])

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Q-values for one feature vector (1-D) or a batch (2-D)."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.sizes[0]:
            raise ValueError(f"expected {self.sizes[0]} input features, got {x.shape[-1]}")
        h = x
        last = self.n_layers - 1
        for i in range(self.n_layers):
            h = h @ self.params[2 * i] + self.params[2 * i + 1]
            if i < last:
                h = np.maximum(h, 0.0)
        return h

    __call__ = forward

    def loss_and_grads(self, x: np.ndarray, actions: np.ndarray, targets: np.ndarray) -> Tuple[float, List[np.ndarray]]:
        """Mean squared error on the chosen action's output and its parameter gradients."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        actions = np.asarray(actions, dtype=np.int64)
        targets = np.asarray(targets, dtype=np.float64)
        if x.shape[0] != actions.shape[0] or actions.shape != targets.shape:
            raise ValueError("need exactly one (action, target) pair per input row")
        acts = [x]
        h = x
        last = self.n_layers - 1
        for i in range(self.n_layers):
            h = h @ self.params[2 * i] + self.params[2 * i + 1]
            if i < last:
                h = np.maximum(h, 0.0)
            acts.append(h)
        rows = np.arange(len(actions))
        residual = h[rows, actions] - targets
        loss = float(np.mean(residual**2))

        delta = np.zeros_like(h)
        delta[rows, actions] = 2.0 * residual / len(actions)
        grads: List[np.ndarray] = [None] * len(self.params)
        for i in range(last, -1, -1):
            grads[2 * i] = acts[i].T @ delta
            grads[2 * i + 1] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.params[2 * i].T) * (acts[i] > 0)
        return loss, grads

    def to_dict(self) -> dict:
        return {"sizes": list(self.sizes), "params": [p.tolist() for p in self.params]}

    @classmethod
    def from_dict(cls, doc: dict) -> "QNetwork":
        return cls(doc["sizes"], [np.array(p, dtype=np.float64) for p in doc["params"]])


@dataclass
class Adam:
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_network(cls, net: QNetwork, lr: float = 0.01, **kw) -> "Adam":
        return cls(lr=lr, m=[np.zeros_like(p) for p in net.params], v=[np.zeros_like(p) for p in net.params], **kw)

    def apply(self, params: List[np.ndarray], grads: List[np.ndarray]) -> None:
        self.step_count += 1
        t = self.step_count
        c1 = 1.0 - self.beta1**t
        c2 = 1.0 - self.beta2**t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def to_dict(self) -> dict:
        return {
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "step_count": self.step_count,
            "m": [a.tolist() for a in self.m],
            "v": [a.tolist() for a in self.v],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Adam":
        return cls(
            lr=doc["lr"],
            beta1=doc["beta1"],
            beta2=doc["beta2"],
            eps=doc["eps"],
            step_count=doc["step_count"],
            m=[np.array(a, dtype=np.float64) for a in doc["m"]],
            v=[np.array(a, dtype=np.float64) for a in doc["v"]],
        )


def train_batch(net: QNetwork, adam: Adam, inputs, actions, targets) -> float:
    """One Adam step on the minibatch; returns the loss before the update."""
    loss, grads = net.loss_and_grads(inputs, actions, targets)
    if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads):
        raise NonFiniteLoss(f"non-finite loss {loss} on batch of {len(actions)}", inputs, actions, targets)
    adam.apply(net.params, grads)
    return loss


def save_checkpoint(path, net: QNetwork, adam: Optional[Adam] = None, meta: Optional[dict] = None) -> None:
    doc = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "network": net.to_dict(),
        "adam": adam.to_dict() if adam is not None else None,
        "meta": meta or {},
    }
    Path(path).write_text(json.dumps(doc))


def load_checkpoint(path) -> Tuple[QNetwork, Optional[Adam], dict]:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != CHECKPOINT_FORMAT or doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: not a {CHECKPOINT_FORMAT} v{CHECKPOINT_VERSION} checkpoint")
    net = QNetwork.from_dict(doc["network"])
    adam = Adam.from_dict(doc["adam"]) if doc.get("adam") else None
    return net, adam, doc.get("meta", {})
