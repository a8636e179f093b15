"""Shard risk evaluation: the resharding trigger and BFT tolerance arithmetic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RiskConfig, TrustConfig
from .core import ShardAssignment
from .txmatrix import TxStats


def f_intra(n_x: int) -> int:
    return (n_x - 1) // 3


def f_total(n: int, d: int) -> int:
    return ((n // d) - 1) // 3 * d


@dataclass(frozen=True)
class RiskReport:
    high_risk: tuple[tuple[int, ...], ...]
    shard_means: tuple[float, ...]
    grand_mean: float
    corrupted: tuple[bool, ...]
    cst_ratio: float
    trigger: bool
    reason: str  # "none" | "shard_corrupted:<x>" | "cst_exceeded"

    @property
    def corrupted_count(self) -> int:
        return sum(self.corrupted)

    @property
    def any_corrupted(self) -> bool:
        return any(self.corrupted)


def evaluate(g: np.ndarray, a: ShardAssignment, stats: TxStats,
             trust_cfg: TrustConfig, risk_cfg: RiskConfig) -> RiskReport:
    g = np.asarray(g, dtype=float)
    high, means, corrupted = [], [], []
    for members in a.members:
        h = tuple(int(i) for i in members if g[i] < trust_cfg.rho_t)
        high.append(h)
        means.append(float(g[members].mean()) if len(members) else 0.0)
        corrupted.append(len(h) > f_intra(len(members)))
    reason = "none"
    for x, bad in enumerate(corrupted):
        if bad:
            reason = f"shard_corrupted:{x}"
            break
    else:
        if stats.ratio > risk_cfg.rho_cr:
            reason = "cst_exceeded"
    return RiskReport(
        high_risk=tuple(high),
        shard_means=tuple(means),
        grand_mean=float(np.mean(means)),
        corrupted=tuple(corrupted),
        cst_ratio=stats.ratio,
        trigger=reason != "none",
        reason=reason,
    )
