"""DQN training loop with a periodically synchronized target network."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from polecart import mlp
from polecart.env import CartPoleEnv
from polecart.mlp import Gradient, MlpParams
from polecart.records import Clock, EpisodeRecord, perf_clock
from polecart.replay import (
    ReplayBuffer,
    SampledBatch,
    Strategy,
    Transition,
    anneal_beta,
    sample,
    update_priorities,
)
from polecart.schedules import Schedule, epsilon_at, select_action


class LossReport(NamedTuple):
    td_errors: np.ndarray
    loss: float


@dataclass
class DqnAgent:
    policy: MlpParams
    target: MlpParams
    buffer: ReplayBuffer
    schedule: Schedule = field(default_factory=Schedule)
    gamma: float = 0.99
    target_sync_every: int = 100
    batch_size: int = 64
    warmup: int = 500
    beta0: float = 0.4
    beta_steps: int = 50000
    optimizer: str = "adam"
    global_step: int = 0
    n_syncs: int = 0
    n_learn_steps: int = 0

    @classmethod
    def create(cls, widths, buffer: ReplayBuffer, rng: np.random.Generator, **kwargs) -> "DqnAgent":
        policy = mlp.init(widths, rng)
        return cls(policy=policy, target=mlp.clone_params(policy), buffer=buffer, **kwargs)

    @property
    def ready(self) -> bool:
        if self.buffer.strategy is Strategy.NONE:
            return len(self.buffer) >= 1
        return len(self.buffer) >= max(self.batch_size, self.warmup)

    @property
    def effective_batch(self) -> int:
        return 1 if self.buffer.strategy is Strategy.NONE else self.batch_size


def compute_targets(target_net: MlpParams, batch: SampledBatch, gamma: float) -> np.ndarray:
    next_q = mlp.forward(target_net, batch.next_states).max(axis=1)
    return batch.rewards + gamma * np.where(batch.terminals, 0.0, next_q)


def loss_and_gradient(agent: DqnAgent, batch: SampledBatch) -> tuple[LossReport, Gradient]:
    """Weighted mean squared TD error and its gradient w.r.t. the policy network.

    Targets come from the target network and are treated as constants.
    """
    if len(batch) == 0:
        raise ValueError("empty batch")
    targets = compute_targets(agent.target, batch, agent.gamma)
    q_all, cache = mlp.forward_cached(agent.policy, batch.states)
    rows = np.arange(len(batch))
    delta = targets - q_all[rows, batch.actions]
    n = len(batch)
    loss = float(np.sum(batch.weights * delta * delta) / n)
    if not np.isfinite(loss):
        raise FloatingPointError(
            f"non-finite loss at global step {agent.global_step}; aborting run"
        )
    upstream = np.zeros_like(q_all)
    upstream[rows, batch.actions] = -2.0 * batch.weights * delta / n
    grad = mlp.backward_cached(agent.policy, cache, upstream)
    return LossReport(delta, loss), grad


def learn_step(agent: DqnAgent, batch: SampledBatch, lr: float) -> LossReport:
    report, grad = loss_and_gradient(agent, batch)
    mlp.optimizer_step(agent.policy, grad, lr, agent.optimizer)
    agent.n_learn_steps += 1
    return report


def sync_target(agent: DqnAgent) -> None:
    mlp.copy_into(agent.target, agent.policy)
    agent.n_syncs += 1


def act(agent: DqnAgent, obs: np.ndarray, rng: np.random.Generator) -> int:
    eps = epsilon_at(agent.schedule, agent.global_step)
    return select_action(mlp.forward(agent.policy, obs), eps, rng).action


def observe_transition(agent: DqnAgent, t: Transition, lr: float, rng: np.random.Generator) -> LossReport | None:
    """Store one transition, then learn and sync as the step count dictates."""
    agent.buffer.push(t)
    agent.global_step += 1
    report = None
    if agent.ready:
        prioritized = agent.buffer.strategy is Strategy.PRIORITIZED
        beta = anneal_beta(agent.beta0, agent.global_step, agent.beta_steps) if prioritized else 1.0
        batch = sample(agent.buffer, agent.effective_batch, rng, beta)
        report = learn_step(agent, batch, lr)
        if prioritized:
            update_priorities(agent.buffer, batch.indices, report.td_errors)
    if agent.global_step % agent.target_sync_every == 0:
        sync_target(agent)
    return report


def train_dqn(
    env: CartPoleEnv,
    agent: DqnAgent,
    episodes: int,
    lr: float = 1e-3,
    rng: np.random.Generator | None = None,
    clock: Clock = perf_clock,
    on_episode: Callable[[EpisodeRecord], None] | None = None,
) -> list[EpisodeRecord]:
    if episodes < 1:
        raise ValueError(f"episodes must be >= 1, got {episodes}")
    rng = rng if rng is not None else np.random.default_rng()
    records = []
    for ep in range(episodes):
        start = clock()
        obs = env.reset()
        ret = 0.0
        length = 0
        done = False
        while not done:
            a = act(agent, obs, rng)
            next_obs, r, terminated, truncated = env.step(a)
            observe_transition(agent, Transition(obs, a, r, next_obs, terminated), lr, rng)
            obs = next_obs
            ret += r
            length += 1
            done = terminated or truncated
        rec = EpisodeRecord(
            episode=ep,
            ret=ret,
            length=length,
            epsilon=epsilon_at(agent.schedule, agent.global_step),
            wall_ms=(clock() - start) * 1000.0,
            global_step=agent.global_step,
        )
        records.append(rec)
        if on_episode is not None:
            on_episode(rec)
    return records
