"""Comparison resharding strategies: random, community (Kernighan-Lin) and trust-based."""

from __future__ import annotations

from typing import Protocol

import numpy as np

from .core import ShardAssignment, balanced_deal
from .reward import Snapshot


class ReshardingStrategy(Protocol):
    name: str

    def propose(self, snap: Snapshot, rng: np.random.Generator) -> ShardAssignment: ...


def random_assignment(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    return balanced_deal(rng.permutation(n), d)


def cut_weight(w: np.ndarray, side: np.ndarray) -> float:
    """Total weight of edges crossing a two-way split (``side`` is boolean)."""
    return float(w[np.ix_(side, ~side)].sum())


def kl_bisect(w: np.ndarray, side: np.ndarray, sweeps: int = 10) -> np.ndarray:
    """Kernighan-Lin refinement of a two-way split of the graph ``w``.

    Each sweep tentatively swaps pairs (locking swapped nodes) in order of
    best gain, then keeps the prefix of swaps with maximal cumulative gain.
    Sweeps stop when that maximum is not positive, so the cut never grows.
    """
    side = side.copy()
    n = len(side)
    for _ in range(sweeps):
        cur = side.copy()
        locked = np.zeros(n, dtype=bool)
        # D[v] = external - internal weight of v under the tentative split
        same = cur[:, None] == cur[None, :]
        dval = np.where(~same, w, 0).sum(axis=1) - np.where(same, w, 0).sum(axis=1)
        gains, swaps = [], []
        while True:
            a_idx = np.flatnonzero(cur & ~locked)
            b_idx = np.flatnonzero(~cur & ~locked)
            if len(a_idx) == 0 or len(b_idx) == 0:
                break
            g = dval[a_idx][:, None] + dval[b_idx][None, :] - 2 * w[np.ix_(a_idx, b_idx)]
            k = int(np.argmax(g))
            ia, ib = divmod(k, len(b_idx))
            a, b = a_idx[ia], b_idx[ib]
            gains.append(float(g[ia, ib]))
            swaps.append((a, b))
            locked[a] = locked[b] = True
            # update D values for unlocked nodes after moving a -> B and b -> A
            for v in np.flatnonzero(~locked):
                if cur[v]:
                    dval[v] += 2 * w[v, a] - 2 * w[v, b]
                else:
                    dval[v] += 2 * w[v, b] - 2 * w[v, a]
            cur[a], cur[b] = False, True
        if not gains:
            break
        cum = np.cumsum(gains)
        best = int(np.argmax(cum))
        if cum[best] <= 1e-12:
            break
        for a, b in swaps[: best + 1]:
            side[a], side[b] = False, True
    return side


def community_partition(w: np.ndarray, d: int, rng: np.random.Generator,
                        sweeps: int = 10) -> np.ndarray:
    """Balanced d-way partition by recursive KL bisection from a random split."""
    n = len(w)
    out = np.zeros(n, dtype=np.int64)

    def split(nodes: np.ndarray, parts: int, first: int):
        if parts == 1:
            out[nodes] = first
            return
        left_parts = parts // 2
        # sizes proportional to shard counts keep the final shards within +-1
        n_left = len(nodes) * left_parts // parts
        if (len(nodes) * left_parts) % parts:
            n_left += 1
        perm = rng.permutation(len(nodes))
        side = np.zeros(len(nodes), dtype=bool)
        side[perm[:n_left]] = True
        side = kl_bisect(w[np.ix_(nodes, nodes)], side, sweeps)
        split(nodes[side], left_parts, first)
        split(nodes[~side], parts - left_parts, first + left_parts)

    split(np.arange(n), d, 0)
    return out


def serpentine_deal(g: np.ndarray, d: int) -> np.ndarray:
    """Sort by trust (descending, ties by id) and deal forward-then-back across shards.

    When D does not divide N the incomplete lap is dealt first, at the
    high-trust end, so the lowest-trust D nodes always form one full lap and
    land in distinct shards.
    """
    order = np.lexsort((np.arange(len(g)), -np.asarray(g)))
    vec = np.empty(len(g), dtype=np.int64)
    head = len(g) % d
    for rank, node in enumerate(order):
        if rank < head:
            lap, pos = 0, rank
        else:
            lap, pos = divmod(rank - head, d)
            lap += head > 0
        vec[node] = pos if lap % 2 == 0 else d - 1 - pos
    return vec


class RandomStrategy:
    name = "random"

    def propose(self, snap: Snapshot, rng: np.random.Generator) -> ShardAssignment:
        return ShardAssignment(random_assignment(snap.n, snap.d, rng), snap.d)


class CommunityStrategy:
    name = "community"

    def __init__(self, sweeps: int = 10):
        self.sweeps = sweeps

    def propose(self, snap: Snapshot, rng: np.random.Generator) -> ShardAssignment:
        w = snap.tx.phi.astype(float)
        return ShardAssignment(community_partition(w, snap.d, rng, self.sweeps), snap.d)


class TrustStrategy:
    """Serpentine deal of nodes ranked by global trust (stand-in for TBSD)."""

    name = "trust"

    def propose(self, snap: Snapshot, rng: np.random.Generator) -> ShardAssignment:
        return ShardAssignment(serpentine_deal(snap.gtt, snap.d), snap.d)
