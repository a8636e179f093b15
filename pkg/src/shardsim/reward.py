"""Six-term resharding reward evaluated against a frozen snapshot.

``R = xi + varrho + eta - psi + omega_in - omega_cr``. The scalar path
(:func:`total_reward`) is the reference; :func:`batch_rewards` evaluates
many proposals at once for the learners and is tested against it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RewardConfig, RiskConfig, SimConfig
from .core import DimensionMismatch, NodeProfile, ShardAssignment, is_valid
from .risk import RiskReport, evaluate, f_intra
from .txmatrix import TransactionMatrix, batch_cst_ratio, cst_stats


class ConstraintViolation(ValueError):
    def __init__(self, shard: int, size: int):
        super().__init__(f"shard {shard} has {size} members")
        self.shard = shard
        self.size = size


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Frozen network state handed to resharding strategies."""

    g_norm: np.ndarray
    gtt: np.ndarray
    tx: TransactionMatrix
    assignment: ShardAssignment
    profiles: tuple[NodeProfile, ...]

    def __post_init__(self):
        for name in ("g_norm", "gtt"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return len(self.gtt)

    @property
    def d(self) -> int:
        return self.assignment.d_shards


@dataclass(frozen=True)
class RewardBreakdown:
    xi: float
    varrho: float
    eta: float
    psi: float
    omega_in: float
    omega_cr: float
    report: RiskReport | None = None

    @property
    def total(self) -> float:
        return self.xi + self.varrho + self.eta - self.psi + self.omega_in - self.omega_cr

    def as_row(self) -> dict:
        return {"xi": self.xi, "varrho": self.varrho, "eta": self.eta, "psi": self.psi,
                "omega_in": self.omega_in, "omega_cr": self.omega_cr, "reward": self.total}


def shard_balance(a: ShardAssignment, cfg: RewardConfig) -> float:
    sizes = a.sizes
    return cfg.e_a if sizes.max() - sizes.min() <= cfg.balance_slack else -cfg.e_a


def corruption_reward(report: RiskReport, cfg: RewardConfig) -> float:
    return -cfg.e_b if report.any_corrupted else cfg.e_b


def cst_reward(phi_ratio: float, risk_cfg: RiskConfig, cfg: RewardConfig) -> float:
    gap = risk_cfg.rho_cr - phi_ratio
    return cfg.lambda_a * gap * cfg.lambda_b ** (cfg.lambda_c * abs(gap))


def shift_penalty(prev: ShardAssignment, nxt: ShardAssignment) -> float:
    if len(prev) != len(nxt):
        raise DimensionMismatch("assignments differ in length")
    return float(np.mean(prev.assignment != nxt.assignment))


def _shard_means(g: np.ndarray, a: ShardAssignment) -> np.ndarray:
    return np.array([g[m].mean() for m in a.members])


def intra_trust_variance(g: np.ndarray, a: ShardAssignment) -> float:
    g = np.asarray(g, dtype=float)
    return float(np.mean([np.mean((g[m] - g[m].mean()) ** 2) for m in a.members]))


def cross_trust_variance(g: np.ndarray, a: ShardAssignment) -> float:
    theta = _shard_means(np.asarray(g, dtype=float), a)
    return float(np.mean((theta - theta.mean()) ** 2))


def total_reward(snap: Snapshot, proposal: ShardAssignment, cfg: SimConfig) -> RewardBreakdown:
    """Reward of ``proposal`` against ``snap``; raises ConstraintViolation when
    a shard falls under the size floor."""
    if len(proposal) != snap.n:
        raise DimensionMismatch("proposal length differs from snapshot")
    sizes = np.bincount(proposal.assignment, minlength=snap.d)
    for x, size in enumerate(sizes):
        if size < cfg.network.n_min:
            raise ConstraintViolation(x, int(size))
    stats = cst_stats(snap.tx, proposal)
    report = evaluate(snap.gtt, proposal, stats, cfg.trust, cfg.risk)
    return RewardBreakdown(
        xi=shard_balance(proposal, cfg.reward),
        varrho=corruption_reward(report, cfg.reward),
        eta=cst_reward(stats.ratio, cfg.risk, cfg.reward),
        psi=shift_penalty(snap.assignment, proposal),
        omega_in=intra_trust_variance(snap.gtt, proposal),
        omega_cr=cross_trust_variance(snap.gtt, proposal),
        report=report,
    )


def reward_or_penalty(snap: Snapshot, proposal: ShardAssignment, cfg: SimConfig) -> float:
    try:
        return total_reward(snap, proposal, cfg).total
    except ConstraintViolation:
        return cfg.reward.violation_penalty


def batch_components(snap: Snapshot, vecs: np.ndarray, cfg: SimConfig) -> dict[str, np.ndarray]:
    """Vectorized reward components for rows of ``vecs`` (B x N).

    Also returns ``valid`` (size floor satisfied) and ``cst_ratio``. Rows
    violating the floor still get components computed; empty shards are
    treated as having mean trust 0 and no members.
    """
    vecs = np.asarray(vecs, dtype=np.int64)
    d = snap.d
    g = snap.gtt
    onehot = vecs[:, :, None] == np.arange(d)[None, None, :]  # B x N x D
    sizes = onehot.sum(axis=1)
    valid = sizes.min(axis=1) >= cfg.network.n_min
    rc = cfg.reward
    xi = np.where(sizes.max(axis=1) - sizes.min(axis=1) <= rc.balance_slack, rc.e_a, -rc.e_a)
    high = (g < cfg.trust.rho_t)
    high_counts = (onehot & high[None, :, None]).sum(axis=1)
    corrupted = high_counts > (np.maximum(sizes, 1) - 1) // 3
    varrho = np.where(corrupted.any(axis=1), -rc.e_b, rc.e_b)
    ratio = batch_cst_ratio(snap.tx.phi, vecs)
    gap = cfg.risk.rho_cr - ratio
    eta = rc.lambda_a * gap * rc.lambda_b ** (rc.lambda_c * np.abs(gap))
    psi = (vecs != snap.assignment.assignment[None, :]).mean(axis=1)
    safe = np.maximum(sizes, 1)
    sums = np.einsum("bnd,n->bd", onehot, g)
    theta = sums / safe
    sq = np.einsum("bnd,n->bd", onehot, g**2) / safe
    var_x = np.maximum(sq - theta**2, 0.0)
    omega_in = var_x.mean(axis=1)
    omega_cr = ((theta - theta.mean(axis=1, keepdims=True)) ** 2).mean(axis=1)
    return {"xi": xi, "varrho": varrho, "eta": eta, "psi": psi,
            "omega_in": omega_in, "omega_cr": omega_cr,
            "valid": valid, "cst_ratio": ratio, "corrupted": corrupted.sum(axis=1)}


def batch_rewards(snap: Snapshot, vecs: np.ndarray, cfg: SimConfig) -> np.ndarray:
    c = batch_components(snap, vecs, cfg)
    total = c["xi"] + c["varrho"] + c["eta"] - c["psi"] + c["omega_in"] - c["omega_cr"]
    return np.where(c["valid"], total, cfg.reward.violation_penalty)
