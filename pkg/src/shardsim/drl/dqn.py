"""Factored-action DQN for single-step virtual resharding.

The network maps the snapshot encoding to N x D action values, one head
per node. A proposal is a joint action, each node picking a shard
epsilon-greedily from its own head. Episodes are one step long, so the TD
target of every head is the immediate reward of the joint action and
training is fitted-Q regression on replayed (state, action, reward)
triples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import DqnConfig
from .mlp import Mlp, Sgd


class ReplayBuffer:
    def __init__(self, capacity: int, state_dim: int, n_nodes: int):
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros((capacity, n_nodes), dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.size = 0
        self.pos = 0

    def __len__(self):
        return self.size

    def push_batch(self, state: np.ndarray, actions: np.ndarray, rewards: np.ndarray):
        for a, r in zip(actions, rewards):
            self.states[self.pos] = state
            self.actions[self.pos] = a
            self.rewards[self.pos] = r
            self.pos = (self.pos + 1) % self.capacity
            self.size = min(self.size + 1, self.capacity)

    def sample(self, batch: int, rng: np.random.Generator):
        idx = rng.integers(0, self.size, size=batch)
        return self.states[idx], self.actions[idx], self.rewards[idx]


@dataclass
class TrainResult:
    greedy: np.ndarray
    scores: np.ndarray
    best_seen: np.ndarray
    best_reward: float
    history: list[dict] = field(default_factory=list)


class DqnLearner:
    def __init__(self, n: int, d: int, cfg: DqnConfig, rng: np.random.Generator):
        self.n, self.d, self.cfg = n, d, cfg
        self.state_dim = n * (2 * d + 1)
        self.net = Mlp([self.state_dim, cfg.hidden, n * d], rng, scale=0.5)
        self.target = self.net.copy()
        self.opt = Sgd(self.net.params, cfg.lr, cfg.momentum, cfg.grad_clip)
        self.buffer = ReplayBuffer(cfg.replay_capacity, self.state_dim, n)
        self.updates = 0

    def q_values(self, state: np.ndarray) -> np.ndarray:
        return self.net(state).reshape(self.n, self.d)

    def act(self, state: np.ndarray, eps: float, rng: np.random.Generator, count: int) -> np.ndarray:
        greedy = np.argmax(self.q_values(state), axis=1)
        explore = rng.random((count, self.n)) < eps
        random_choice = rng.integers(0, self.d, size=(count, self.n))
        return np.where(explore, random_choice, greedy[None, :])

    def loss_and_grads(self, states, actions, rewards):
        """Half mean squared TD error summed over node heads."""
        out, cache = self.net.forward(states)
        q = out.reshape(len(states), self.n, self.d)
        chosen = np.take_along_axis(q, actions[:, :, None], axis=2)[:, :, 0]
        err = chosen - rewards[:, None]
        upstream = np.zeros_like(q)
        np.put_along_axis(upstream, actions[:, :, None], err[:, :, None] / len(states), axis=2)
        grads = self.net.backward(cache, upstream.reshape(len(states), -1))
        loss = 0.5 * float((err**2).sum(axis=1).mean())
        return loss, grads

    def update(self, rng: np.random.Generator) -> float:
        batch = self.buffer.sample(min(self.cfg.batch_size, len(self.buffer)), rng)
        loss, grads = self.loss_and_grads(*batch)
        self.opt.step(grads)
        self.updates += 1
        if self.updates % self.cfg.target_sync == 0:
            self.target = self.net.copy()
        return loss

    def train(self, state: np.ndarray, reward_fn, rng: np.random.Generator,
              epochs: int | None = None) -> TrainResult:
        """Train on one snapshot. ``reward_fn`` maps a (B x N) action batch to rewards."""
        epochs = self.cfg.epochs if epochs is None else epochs
        best_vec, best_r = None, -np.inf
        history = []
        for epoch in range(epochs):
            eps = self.cfg.epsilon(epoch)
            actions = self.act(state, eps, rng, self.cfg.rollouts_per_epoch)
            rewards = reward_fn(actions)
            k = int(np.argmax(rewards))
            if rewards[k] > best_r:
                best_vec, best_r = actions[k].copy(), float(rewards[k])
            self.buffer.push_batch(state, actions, rewards)
            loss = float(np.mean([self.update(rng) for _ in range(self.cfg.updates_per_epoch)]))
            history.append({"epoch": epoch, "mean_reward": float(rewards.mean()),
                            "loss": loss, "epsilon": eps})
        scores = self.q_values(state)
        return TrainResult(np.argmax(scores, axis=1), scores, best_vec, best_r, history)
