"""Factored-action PPO for single-step virtual resharding.

The actor emits N x D logits (one categorical per node); the joint
log-probability of an allocation is the sum over nodes. The critic
estimates V(s) and the advantage is ``r - V(s)`` (one-step episodes).
"""

from __future__ import annotations

import numpy as np

from ..config import PpoConfig
from .dqn import TrainResult
from .mlp import Mlp, Sgd


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def clipped_surrogate(ratio: np.ndarray, adv: np.ndarray, clip: float):
    """Per-sample ``min(r*A, clip(r)*A)`` and its derivative w.r.t. ``r``."""
    unclipped = ratio * adv
    clipped = np.clip(ratio, 1 - clip, 1 + clip) * adv
    take_unclipped = unclipped <= clipped
    value = np.where(take_unclipped, unclipped, clipped)
    grad = np.where(take_unclipped, adv, 0.0)
    return value, grad


def sample_actions(probs: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(probs, axis=1)
    u = rng.random((count, probs.shape[0], 1))
    acts = (u > cdf[None, :, :]).sum(axis=2)
    return np.minimum(acts, probs.shape[1] - 1)


class PpoLearner:
    def __init__(self, n: int, d: int, cfg: PpoConfig, rng: np.random.Generator):
        self.n, self.d, self.cfg = n, d, cfg
        self.state_dim = n * (2 * d + 1)
        self.actor = Mlp([self.state_dim, cfg.hidden, n * d], rng, scale=0.5)
        self.critic = Mlp([self.state_dim, cfg.hidden, 1], rng, scale=0.5)
        self.actor_opt = Sgd(self.actor.params, cfg.lr, cfg.momentum, cfg.grad_clip)
        self.critic_opt = Sgd(self.critic.params, cfg.lr, cfg.momentum, cfg.grad_clip)

    def logits(self, state: np.ndarray) -> np.ndarray:
        return self.actor(state).reshape(self.n, self.d)

    def policy_loss_grads(self, state, actions, logp_old, adv):
        """Clipped-surrogate loss with entropy bonus for rollouts sharing ``state``.

        Returns (loss, actor grads, mean ratio, clip fraction).
        """
        out, cache = self.actor.forward(state)
        logits = out.reshape(self.n, self.d)
        logp = log_softmax(logits)
        p = np.exp(logp)
        m = len(actions)
        node_idx = np.arange(self.n)[None, :]
        logp_new = logp[node_idx, actions].sum(axis=1)
        ratio = np.exp(logp_new - logp_old)
        surr, dsurr_dratio = clipped_surrogate(ratio, adv, self.cfg.clip_ratio)
        ent_nodes = -(p * logp).sum(axis=1)
        loss = -surr.mean() - self.cfg.entropy_coef * ent_nodes.sum()

        # d(-mean surr)/d logp_new[b] = -dsurr/dratio * ratio / m
        coef = -dsurr_dratio * ratio / m
        counts = np.zeros((self.n, self.d))
        np.add.at(counts, (np.broadcast_to(node_idx, actions.shape), actions),
                  np.broadcast_to(coef[:, None], actions.shape))
        # d logp_new / d logits[i, k] = [a_i == k] - p[i, k]
        g_logits = counts - coef.sum() * p
        # entropy: dH_i/dz_k = -p_k (log p_k + H_i)
        g_logits += self.cfg.entropy_coef * p * (logp + ent_nodes[:, None])
        grads = self.actor.backward(cache, g_logits.reshape(-1))
        clip_frac = float(np.mean(np.abs(ratio - 1) > self.cfg.clip_ratio))
        return loss, grads, float(ratio.mean()), clip_frac

    def value_loss_grads(self, state, rewards):
        v, cache = self.critic.forward(state)
        err = v[0] - rewards
        loss = self.cfg.value_coef * 0.5 * float((err**2).mean())
        grads = self.critic.backward(cache, np.array([self.cfg.value_coef * err.mean()]))
        return loss, grads

    def train(self, state: np.ndarray, reward_fn, rng: np.random.Generator,
              epochs: int | None = None) -> TrainResult:
        cfg = self.cfg
        epochs = cfg.epochs if epochs is None else epochs
        best_vec, best_r = None, -np.inf
        history = []
        for epoch in range(epochs):
            logits = self.logits(state)
            probs = softmax(logits)
            actions = sample_actions(probs, cfg.rollout_batch, rng)
            logp_old = log_softmax(logits)[np.arange(self.n)[None, :], actions].sum(axis=1)
            rewards = reward_fn(actions)
            k = int(np.argmax(rewards))
            if rewards[k] > best_r:
                best_vec, best_r = actions[k].copy(), float(rewards[k])
            value = float(self.critic(state)[0])
            adv = rewards - value
            std = adv.std()
            adv = (adv - adv.mean()) / std if std > 1e-8 else np.zeros_like(adv)
            losses = []
            for _ in range(cfg.update_epochs):
                perm = rng.permutation(len(actions))
                for mb in np.array_split(perm, cfg.minibatches):
                    if len(mb) == 0:
                        continue
                    loss, grads, _, _ = self.policy_loss_grads(state, actions[mb], logp_old[mb], adv[mb])
                    self.actor_opt.step(grads)
                    vloss, vgrads = self.value_loss_grads(state, rewards[mb])
                    self.critic_opt.step(vgrads)
                    losses.append(loss + vloss)
            history.append({"epoch": epoch, "mean_reward": float(rewards.mean()),
                            "loss": float(np.mean(losses))})
        logits = self.logits(state)
        return TrainResult(np.argmax(logits, axis=1), logits, best_vec, best_r, history)
