"""Intra-shard leader rounds and voting under the honest/dishonest behaviour model.

PBFT message exchange is abstracted away: each round produces one final
outcome per validator (valid, invalid, or missing when the vote is lost).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .config import AttackConfig
from .core import NodeProfile, ShardAssignment, new_rng


class VoteOutcome(IntEnum):
    MISSING = 0
    INVALID = 1
    VALID = 2


class NonFiniteTrust(ValueError):
    pass


def normalize_trust(g_prev: np.ndarray) -> np.ndarray:
    """Min-max scale the previous episode's global trust into [0, 1].

    When every node has the same trust the scale is undefined and all
    nodes get 1.
    """
    g = np.asarray(g_prev, dtype=float)
    if not np.all(np.isfinite(g)):
        raise NonFiniteTrust("global trust contains non-finite entries")
    lo, hi = g.min(), g.max()
    if hi == lo:
        return np.ones_like(g)
    return (g - lo) / (hi - lo)


def vote_probability(voter: NodeProfile, leader_dishonest: bool, leader_trust: float,
                     u: int, dishonest_fraction: float, atk: AttackConfig) -> float:
    """Probability that ``voter`` casts a valid vote for the current leader.

    ``leader_trust`` is the proposer's normalized trust and ``u`` is 1 when
    the proposed block matches the voter's local version.
    """
    honest_p = (1 - atk.fail_prob) * atk.w_g * leader_trust * atk.w_u * u
    if not voter.dishonest or dishonest_fraction < atk.tau:
        p = honest_p
    else:
        collusion = 1.0 if leader_dishonest else 1.0 - atk.kappa
        p = (1 - atk.fail_prob) * collusion
    return float(min(max(p, 0.0), 1.0))


@dataclass(frozen=True, eq=False)
class ShardBvt:
    """Verification record of one shard for one episode.

    Local index ``k`` refers to ``members[k]``. ``outcomes[r, k]`` is the
    vote of member ``k`` in round ``r`` whose leader is ``schedule[r]``
    (a local index).
    """

    shard: int
    members: np.ndarray
    schedule: np.ndarray
    outcomes: np.ndarray

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def iota(self) -> np.ndarray:
        """Rounds led by each member."""
        return np.bincount(self.schedule, minlength=self.size)

    @property
    def valid_counts(self) -> np.ndarray:
        """``[i, j]`` = valid votes member i cast while member j led."""
        n = self.size
        out = np.zeros((n, n), dtype=np.int64)
        for r, leader in enumerate(self.schedule):
            out[:, leader] += self.outcomes[r] == VoteOutcome.VALID
        return out

    @property
    def nonempty_ratio(self) -> np.ndarray:
        """``[p, j]`` = fraction of j's rounds in which p's vote arrived."""
        n = self.size
        cnt = np.zeros((n, n), dtype=np.int64)
        for r, leader in enumerate(self.schedule):
            cnt[:, leader] += self.outcomes[r] != VoteOutcome.MISSING
        iota = self.iota
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(iota > 0, cnt / np.maximum(iota, 1), 0.0)

    def local_index(self, node: int) -> int:
        hits = np.flatnonzero(self.members == node)
        if len(hits) == 0:
            raise KeyError(f"node {node} not in shard {self.shard}")
        return int(hits[0])

    def to_json(self) -> dict:
        return {
            "shard": self.shard,
            "members": self.members.tolist(),
            "schedule": self.members[self.schedule].tolist(),
            "outcomes": [[VoteOutcome(v).name.lower() for v in row] for row in self.outcomes],
        }


@dataclass(frozen=True)
class BlockVerificationTable:
    shards: tuple[ShardBvt, ...]

    def shard_of(self, node: int) -> ShardBvt:
        for s in self.shards:
            if node in s.members:
                return s
        raise KeyError(f"node {node} not recorded")

    def to_json(self) -> list:
        return [s.to_json() for s in self.shards]


def simulate_shard(shard: int, members: np.ndarray, dishonest: np.ndarray,
                   g_norm: np.ndarray, atk: AttackConfig, leads: int,
                   rng: np.random.Generator) -> ShardBvt:
    n = len(members)
    bad = dishonest[members]
    frac = bad.sum() / n if n else 0.0
    colluding = frac >= atk.tau
    schedule = np.tile(np.arange(n), leads)
    draws = rng.random((len(schedule), n, 2))
    outcomes = np.empty((len(schedule), n), dtype=np.int8)
    keep = 1.0 - atk.fail_prob
    for r, leader in enumerate(schedule):
        lead_bad = bool(bad[leader])
        trust = g_norm[members[leader]]
        # A colluding leader's block mismatches every honest local copy.
        u_honest = 0 if (lead_bad and colluding) else 1
        honest_p = keep * atk.w_g * trust * atk.w_u * u_honest
        if colluding:
            bad_p = keep * (1.0 if lead_bad else 1.0 - atk.kappa)
        else:
            bad_p = honest_p
        p = np.where(bad, bad_p, honest_p)
        p = np.clip(p, 0.0, 1.0)
        missing = draws[r, :, 0] < atk.fail_prob
        cond = p / keep if keep > 0 else np.zeros(n)
        valid = draws[r, :, 1] < cond
        row = np.where(missing, VoteOutcome.MISSING,
                       np.where(valid, VoteOutcome.VALID, VoteOutcome.INVALID))
        row[leader] = VoteOutcome.VALID
        outcomes[r] = row
    return ShardBvt(shard, members.copy(), schedule, outcomes)


def run_episode_votes(a: ShardAssignment, profiles, g_norm: np.ndarray,
                      atk: AttackConfig, leads: int, seed: int, episode: int) -> BlockVerificationTable:
    """Simulate every shard's leader rounds for one episode.

    Each shard draws from its own stream, ``votes/e<episode>/shard-<x>``, so
    shards are independent of each other and of simulation order.
    """
    dishonest = np.array([p.dishonest for p in profiles], dtype=bool)
    g_norm = np.asarray(g_norm, dtype=float)
    shards = []
    for x, members in enumerate(a.members):
        rng = new_rng(seed, f"votes/e{episode}/shard-{x}")
        shards.append(simulate_shard(x, members, dishonest, g_norm, atk, leads, rng))
    return BlockVerificationTable(tuple(shards))
