"""From-scratch learners (DQN, PPO) exposed as resharding strategies."""

from __future__ import annotations

import json

import numpy as np

from ..config import SimConfig
from ..core import ShardAssignment, is_valid, new_rng
from ..environment import encode_state
from ..reward import Snapshot, batch_rewards
from .dqn import DqnLearner, TrainResult
from .mlp import Mlp, Sgd
from .policy import greedy_action, repair
from .ppo import PpoLearner

__all__ = ["DrlStrategy", "DqnLearner", "PpoLearner", "Mlp", "Sgd", "TrainResult",
           "greedy_action", "repair", "propose_from"]


def propose_from(result: TrainResult, cfg: SimConfig) -> tuple[np.ndarray, bool]:
    """Decode the greedy/mode action, repairing it if a shard is under-sized."""
    vec = result.greedy.astype(np.int64)
    if is_valid(vec, cfg.network):
        return vec, False
    return repair(vec, result.scores, cfg.network.n_min)


class DrlStrategy:
    """Trains a learner on every triggered snapshot, then proposes its allocation.

    The learner persists across episodes (warm start). If the decoded
    proposal scores below the best allocation sampled during training, the
    best-seen allocation is returned instead; ``last_status`` records which.
    """

    def __init__(self, kind: str, cfg: SimConfig, seed: int | None = None,
                 use_best_seen: bool = True):
        if kind not in ("dqn", "ppo"):
            raise ValueError(f"unknown learner {kind!r}")
        self.kind = kind
        self.name = kind
        self.cfg = cfg
        self.use_best_seen = use_best_seen
        seed = cfg.network.seed if seed is None else seed
        init = new_rng(seed, f"{kind}/init")
        n, d = cfg.network.n_total, cfg.network.d_shards
        self.learner = (DqnLearner(n, d, cfg.dqn, init) if kind == "dqn"
                        else PpoLearner(n, d, cfg.ppo, init))
        self.last_status = "resharded"
        self.last_result: TrainResult | None = None
        self.curve: list[dict] = []

    def policy_params(self) -> dict:
        """JSON-ready network parameters, enough to rebuild the trained policy."""
        nets = ({"q": self.learner.net} if self.kind == "dqn"
                else {"actor": self.learner.actor, "critic": self.learner.critic})
        return {"kind": self.kind, **{k: json.loads(v.to_json()) for k, v in nets.items()}}

    def train(self, snap: Snapshot, rng: np.random.Generator, epochs: int | None = None) -> TrainResult:
        state = encode_state(snap)
        result = self.learner.train(state, lambda acts: batch_rewards(snap, acts, self.cfg), rng, epochs)
        self.last_result = result
        return result

    def propose(self, snap: Snapshot, rng: np.random.Generator) -> ShardAssignment:
        result = self.train(snap, rng)
        vec, repaired = propose_from(result, self.cfg)
        status = "repaired" if repaired else "greedy"
        if self.use_best_seen and result.best_seen is not None:
            best = batch_rewards(snap, np.stack([vec, result.best_seen]), self.cfg)
            if best[1] > best[0]:
                vec, status = result.best_seen, "best_seen"
        self.last_status = status
        self.curve.extend(result.history)
        return ShardAssignment(vec, snap.d)
