"""Derived experiment metrics: model-derived throughput and corruption ratios.

The throughput figure is a stand-in model (labelled "model-derived" in
outputs): corrupted shards process nothing, a cross-shard transaction
costs ``cst_cost`` shard slots and survives only if both endpoint shards
are healthy.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .config import ThroughputModel
from .core import ShardAssignment
from .risk import RiskReport
from .txmatrix import TransactionMatrix

THROUGHPUT_LABEL = "model-derived"


class InsufficientRows(ValueError):
    pass


def episode_throughput(tx: TransactionMatrix, a: ShardAssignment, report: RiskReport,
                       model: ThroughputModel) -> float:
    healthy = ~np.array(report.corrupted, dtype=bool)
    node_ok = healthy[a.assignment]
    phi = tx.phi
    same = a.assignment[:, None] == a.assignment[None, :]
    both = node_ok[:, None] & node_ok[None, :]
    ist = phi[same & both].sum() / 2
    cst = phi[~same & both].sum() / 2
    return float(ist + cst / model.cst_cost)


def normalized_throughput(run_h: Sequence[float], run_0: Sequence[float]) -> float:
    """Mean episode throughput with dishonest nodes over the h = 0 run's mean."""
    base = float(np.mean(run_0))
    if base == 0:
        raise ZeroDivisionError("baseline throughput is zero")
    return float(np.mean(run_h)) / base


def corrupted_shard_ratio(corrupted_counts: Sequence[int], d_shards: int, window: int) -> float:
    """Fraction of corrupted (episode, shard) cells over the last ``window`` episodes."""
    if len(corrupted_counts) < window:
        raise InsufficientRows(f"need {window} rows, have {len(corrupted_counts)}")
    tail = np.asarray(corrupted_counts[len(corrupted_counts) - window:], dtype=float)
    return float(tail.sum() / (window * d_shards))


def summarize(rows: list[dict], d_shards: int, window: int | None = None) -> dict:
    """Aggregate per-episode rows into the run summary."""
    if not rows:
        return {"episodes": 0}
    k = min(window or len(rows), len(rows))

    def mean(key, tail=False):
        sel = rows[-k:] if tail else rows
        return float(np.mean([r[key] for r in sel]))

    return {
        "episodes": len(rows),
        "mean_reward": mean("reward"),
        "mean_reward_tail": mean("reward", tail=True),
        "mean_cst_ratio": mean("cst_ratio"),
        "mean_psi": mean("psi"),
        "mean_omega_in": mean("omega_in"),
        "mean_omega_cr": mean("omega_cr"),
        "corrupted_shard_ratio": corrupted_shard_ratio(
            [r["corrupted_count"] for r in rows], d_shards, k),
        "mean_throughput": mean("throughput"),
        "throughput_model": THROUGHPUT_LABEL,
        "window": k,
    }
