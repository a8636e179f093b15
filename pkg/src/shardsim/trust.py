"""Local trust from verification records, global trust via cosine similarity.

Pipeline per episode: BVT -> leader pass ratios / feedback terms -> local
trust table (N x N) -> row cosine similarities -> global trust vector.
"""

from __future__ import annotations

import numpy as np

from .config import TrustConfig
from .consensus import BlockVerificationTable, ShardBvt
from .core import ShardAssignment


class NeverLed(ValueError):
    pass


class ShardTooSmallForIndirect(ValueError):
    pass


def _pass_ratios(s: ShardBvt) -> np.ndarray:
    iota = s.iota
    v = s.valid_counts.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(iota > 0, v / (np.maximum(iota, 1) * s.size), 0.0)


def leader_pass_ratio(bvt: BlockVerificationTable, j: int) -> float:
    s = bvt.shard_of(j)
    lj = s.local_index(j)
    if s.iota[lj] == 0:
        raise NeverLed(f"node {j} never led")
    return float(_pass_ratios(s)[lj])


def _indirect_terms(s: ShardBvt) -> np.ndarray:
    """``[p, j]`` = delta_pj * V_p ** (iota_j - delta_pj + 1), with 0**0 = 1."""
    v = _pass_ratios(s)
    delta = s.nonempty_ratio
    expo = s.iota[None, :] - delta + 1.0
    return delta * np.power(v[:, None], expo)


def indirect_feedback(bvt: BlockVerificationTable, i: int, j: int, cfg: TrustConfig) -> float:
    s = bvt.shard_of(j)
    li, lj = s.local_index(i), s.local_index(j)
    if s.size <= 2:
        raise ShardTooSmallForIndirect(f"shard {s.shard} has {s.size} members")
    v = _pass_ratios(s)
    terms = _indirect_terms(s)
    others = [p for p in range(s.size) if p not in (li, lj)]
    return float(cfg.gamma * v[lj]
                 + cfg.gamma**2 / (s.size - 2) * terms[others, lj].sum())


def direct_feedback(bvt: BlockVerificationTable, i: int, j: int) -> float:
    """Fraction of i's leader rounds in which j voted valid."""
    s = bvt.shard_of(i)
    li, lj = s.local_index(i), s.local_index(j)
    iota = s.iota[li]
    if iota == 0:
        raise NeverLed(f"node {i} never led")
    return float(s.valid_counts[lj, li] / iota)


def shard_feedback(s: ShardBvt, cfg: TrustConfig) -> tuple[np.ndarray, np.ndarray]:
    """Clamped indirect and direct feedback matrices for one shard (local indices).

    Indirect feedback can exceed 1 (gamma + gamma**2), so it is clamped to
    [0, 1] before mixing. Shards of two or fewer fall back to gamma * V_j.
    The diagonal of the direct matrix is 1 (leaders always self-endorse).
    """
    n = s.size
    v = _pass_ratios(s)
    if n <= 2:
        indirect = np.tile(cfg.gamma * v, (n, 1))
    else:
        terms = _indirect_terms(s)
        np.fill_diagonal(terms, 0.0)  # p == j never counts
        col = terms.sum(axis=0)
        # exclude p == i for each row i
        excl = col[None, :] - terms
        indirect = cfg.gamma * v[None, :] + cfg.gamma**2 / (n - 2) * excl
    indirect = np.clip(indirect, 0.0, 1.0)
    iota = s.iota
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = np.where(iota[:, None] > 0,
                          s.valid_counts.T / np.maximum(iota, 1)[:, None], 0.0)
    np.fill_diagonal(direct, 1.0)
    return indirect, direct


def build_ltt(bvt: BlockVerificationTable, g_prev: np.ndarray, a: ShardAssignment,
              cfg: TrustConfig) -> np.ndarray:
    """Local trust table; entry [i, j] is the trust i sends about j.

    The history term and the cross-shard entries use the scored node's
    previous global trust, ``g_prev[j]``.
    """
    g_prev = np.asarray(g_prev, dtype=float)
    n = len(a)
    ltt = np.tile(g_prev, (n, 1))
    for s in bvt.shards:
        indirect, direct = shard_feedback(s, cfg)
        m = s.members
        ltt[np.ix_(m, m)] = (cfg.alpha * indirect + cfg.beta * direct
                             + cfg.mu * g_prev[m][None, :])
    return ltt


def _rescale_rows(ltt: np.ndarray) -> np.ndarray:
    # divide by the row max so tiny magnitudes do not underflow when squared
    peak = np.abs(ltt).max(axis=1, keepdims=True)
    return ltt / np.where(peak > 0, peak, 1.0)


def similarity_matrix(ltt: np.ndarray) -> np.ndarray:
    ltt = _rescale_rows(np.asarray(ltt, dtype=float))
    norms = np.linalg.norm(ltt, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    unit = ltt / safe[:, None]
    sim = unit @ unit.T
    zero = norms == 0
    sim[zero, :] = 0.0
    sim[:, zero] = 0.0
    return np.clip(sim, -1.0, 1.0)


def row_similarity(ltt: np.ndarray, i: int, j: int) -> float:
    a, b = _rescale_rows(np.asarray(ltt, dtype=float)[[i, j]])
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def build_gtt(ltt: np.ndarray) -> np.ndarray:
    """Global trust: each node's mean cosine similarity to every row (itself included)."""
    return similarity_matrix(np.asarray(ltt, dtype=float)).mean(axis=1)
