"""Shared identity/assignment types and the seeded randomness contract."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import NetworkConfig


class ShardTooSmall(ValueError):
    def __init__(self, shard: int, size: int):
        super().__init__(f"shard {shard} has {size} members")
        self.shard = shard
        self.size = size


class IndexOutOfRange(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


def new_rng(seed: int, stream_label: str) -> np.random.Generator:
    """Deterministic generator for one named stream of a run.

    The stream is PCG64 (numpy's default bit generator) keyed by a
    ``SeedSequence`` whose entropy is ``[seed mod 2**32, seed >> 32, *w]`` where ``w`` are the four
    little-endian 32-bit words of the first 16 bytes of ``sha256(label)``.
    Distinct labels under one seed therefore give independent streams.
    """
    digest = hashlib.sha256(stream_label.encode("utf-8")).digest()[:16]
    words = np.frombuffer(digest, dtype="<u4").tolist()
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFF, int(seed) >> 32, *words])
    return np.random.Generator(np.random.PCG64(ss))


class Honesty(Enum):
    HONEST = "honest"
    DISHONEST = "dishonest"


@dataclass(frozen=True)
class NodeProfile:
    id: int
    honesty: Honesty

    @property
    def dishonest(self) -> bool:
        return self.honesty is Honesty.DISHONEST


def make_profiles(n_total: int, dishonest_ids) -> tuple[NodeProfile, ...]:
    bad = set(int(i) for i in dishonest_ids)
    return tuple(
        NodeProfile(i, Honesty.DISHONEST if i in bad else Honesty.HONEST)
        for i in range(n_total)
    )


def dishonest_mask(profiles) -> np.ndarray:
    return np.array([p.dishonest for p in profiles], dtype=bool)


@dataclass(frozen=True, eq=False)
class ShardAssignment:
    """Node -> shard vector. ``validated`` marks assignments that passed
    :func:`validate_assignment`; raw proposals may violate the size floor."""

    assignment: np.ndarray
    d_shards: int
    validated: bool = False

    def __post_init__(self):
        arr = np.asarray(self.assignment, dtype=np.int64).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "assignment", arr)

    def __len__(self):
        return len(self.assignment)

    def __eq__(self, other):
        if not isinstance(other, ShardAssignment):
            return NotImplemented
        return self.d_shards == other.d_shards and np.array_equal(
            self.assignment, other.assignment
        )

    def __hash__(self):
        return hash((self.d_shards, self.assignment.tobytes()))

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.d_shards)

    @property
    def members(self) -> tuple[np.ndarray, ...]:
        return tuple(np.flatnonzero(self.assignment == x) for x in range(self.d_shards))


def validate_assignment(a: ShardAssignment, cfg: NetworkConfig) -> ShardAssignment:
    """Check the per-shard size floor and return a validated copy."""
    vec = a.assignment
    if len(vec) != cfg.n_total:
        raise DimensionMismatch(f"assignment has {len(vec)} entries, expected {cfg.n_total}")
    if len(vec) and (vec.min() < 0 or vec.max() >= cfg.d_shards):
        raise IndexOutOfRange(f"shard index outside [0, {cfg.d_shards})")
    sizes = np.bincount(vec, minlength=cfg.d_shards)
    for x, size in enumerate(sizes):
        if size < cfg.n_min:
            raise ShardTooSmall(x, int(size))
    return ShardAssignment(vec, cfg.d_shards, validated=True)


def is_valid(vec: np.ndarray, cfg: NetworkConfig) -> bool:
    sizes = np.bincount(vec, minlength=cfg.d_shards)
    return len(sizes) == cfg.d_shards and bool(sizes.min() >= cfg.n_min)


def balanced_deal(order: np.ndarray, d_shards: int) -> np.ndarray:
    """Deal nodes in ``order`` round-robin so shard sizes differ by <= 1."""
    vec = np.empty(len(order), dtype=np.int64)
    vec[np.asarray(order)] = np.arange(len(order)) % d_shards
    return vec


def initial_setup(net: NetworkConfig, h_dishonest: int, placement: str, rng: np.random.Generator):
    """Draw dishonest identities and the starting balanced assignment.

    ``concentrated`` packs the dishonest nodes into shard 0 (up to its size),
    the scenario where a single shard is overtaken from the start.
    """
    order = rng.permutation(net.n_total)
    vec = balanced_deal(order, net.d_shards)
    if placement == "concentrated":
        shard0 = np.flatnonzero(vec == 0)
        others = np.flatnonzero(vec != 0)
        k = min(h_dishonest, len(shard0))
        bad = list(shard0[:k]) + list(others[: h_dishonest - k])
    else:
        bad = rng.choice(net.n_total, size=h_dishonest, replace=False).tolist()
    profiles = make_profiles(net.n_total, bad)
    return profiles, validate_assignment(ShardAssignment(vec, net.d_shards), net)
