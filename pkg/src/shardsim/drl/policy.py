"""Turning per-node preference scores into a valid allocation."""

from __future__ import annotations

import numpy as np


def greedy_action(scores: np.ndarray) -> np.ndarray:
    """Per-node argmax over shard scores (N x D); ties go to the lower shard."""
    return np.argmax(scores, axis=1).astype(np.int64)


def repair(vec: np.ndarray, scores: np.ndarray, n_min: int) -> tuple[np.ndarray, bool]:
    """Fill under-sized shards with the weakest-margin nodes of the largest shard.

    A node's margin for moving from shard ``src`` to ``dst`` is
    ``scores[i, src] - scores[i, dst]``; the smallest margin moves first
    (ties by node id). Returns the repaired vector and whether anything moved.
    """
    vec = np.array(vec, dtype=np.int64)
    d = scores.shape[1]
    if len(vec) < d * n_min:
        raise ValueError("not enough nodes to satisfy the size floor")
    moved = False
    while True:
        sizes = np.bincount(vec, minlength=d)
        short = np.flatnonzero(sizes < n_min)
        if len(short) == 0:
            return vec, moved
        dst = int(short[0])
        src = int(np.argmax(sizes))
        cand = np.flatnonzero(vec == src)
        margin = scores[cand, src] - scores[cand, dst]
        pick = cand[np.lexsort((cand, margin))[0]]
        vec[pick] = dst
        moved = True
