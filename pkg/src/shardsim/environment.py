"""Episode state machine: votes -> trust -> risk check -> reshard -> metrics."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .consensus import normalize_trust, run_episode_votes
from .core import NodeProfile, ShardAssignment, dishonest_mask, initial_setup, new_rng, validate_assignment
from .metrics import episode_throughput
from .reward import (ConstraintViolation, RewardBreakdown, Snapshot, total_reward)
from .risk import RiskReport, evaluate
from .trust import build_gtt, build_ltt
from .txmatrix import TransactionMatrix, cst_stats, generate

__all__ = ["EpisodeState", "Snapshot", "encode_state", "virtual_reward",
           "initial_state", "step_episode"]


@dataclass(frozen=True)
class EpisodeState:
    episode: int
    assignment: ShardAssignment
    gtt: np.ndarray  # global trust from the previous episode
    tx: TransactionMatrix
    profiles: tuple[NodeProfile, ...]
    last_report: RiskReport | None = None
    last_snapshot: Snapshot | None = None
    metrics_row: dict | None = None


def _tx_for(cfg: SimConfig, profiles, episode: int) -> TransactionMatrix:
    label = f"tx/e{episode}" if cfg.tx.resample else "tx/e0"
    rng = new_rng(cfg.network.seed, label)
    return generate(cfg.network.n_total, dishonest_mask(profiles), rng,
                    cfg.tx.base_mean, cfg.tx.base_sd, cfg.tx.collusion_boost)


def initial_state(cfg: SimConfig) -> EpisodeState:
    """Episode-0 state: identities, a random balanced allocation, trust all ones."""
    net = cfg.network
    profiles, a = initial_setup(net, cfg.attack.h_dishonest, cfg.attack.placement,
                                new_rng(net.seed, "init"))
    return EpisodeState(
        episode=0,
        assignment=a,
        gtt=np.ones(net.n_total),
        tx=_tx_for(cfg, profiles, 0),
        profiles=profiles,
    )


def encode_state(snap: Snapshot) -> np.ndarray:
    """Per node: one-hot shard, normalized trust, share of its traffic into each shard."""
    n, d = snap.n, snap.d
    onehot = np.eye(d)[snap.assignment.assignment]
    phi = snap.tx.phi.astype(float)
    per_shard = phi @ onehot  # n x d traffic into each shard
    totals = per_shard.sum(axis=1, keepdims=True)
    affinity = np.divide(per_shard, totals, out=np.zeros_like(per_shard), where=totals > 0)
    feats = np.concatenate([onehot, snap.g_norm[:, None], affinity], axis=1)
    return feats.reshape(n * (2 * d + 1))


def virtual_reward(snap: Snapshot, proposal: ShardAssignment, cfg: SimConfig) -> RewardBreakdown | None:
    """Reward of a trial allocation; None when it breaks the shard-size floor
    (callers score that as the fixed violation penalty)."""
    try:
        return total_reward(snap, proposal, cfg)
    except ConstraintViolation:
        return None


def step_episode(state: EpisodeState, strategy, cfg: SimConfig,
                 strategy_name: str | None = None, bvt_sink: list | None = None) -> EpisodeState:
    """One episode; when ``bvt_sink`` is a list, the episode's BVT (as JSON-ready
    dicts) is appended to it."""
    net = cfg.network
    e = state.episode
    # Step 1: consensus rounds and trust tables
    g_norm_prev = normalize_trust(state.gtt)
    bvt = run_episode_votes(state.assignment, state.profiles, g_norm_prev, cfg.attack,
                            net.leads_per_episode, net.seed, e)
    if bvt_sink is not None:
        bvt_sink.append({"episode": e, "shards": bvt.to_json()})
    ltt = build_ltt(bvt, state.gtt, state.assignment, cfg.trust)
    gtt = build_gtt(ltt)
    stats = cst_stats(state.tx, state.assignment)
    report = evaluate(gtt, state.assignment, stats, cfg.trust, cfg.risk)

    snap = Snapshot(normalize_trust(gtt), gtt, state.tx, state.assignment, state.profiles)
    applied = state.assignment
    status = "kept"
    # Steps 2-3: virtual resharding and allocation update
    if report.trigger:
        try:
            proposal = strategy.propose(snap, new_rng(net.seed, f"strategy/e{e}"))
            applied = validate_assignment(proposal, net)
            status = getattr(strategy, "last_status", "resharded")
        except Exception as exc:  # strategy failure keeps the current allocation
            status = f"strategy_failed:{type(exc).__name__}"
            applied = state.assignment

    # Step 4: metrics for the allocation now in force
    breakdown = total_reward(snap, applied, cfg)
    applied_report = breakdown.report
    row = {
        "episode": e,
        "strategy": strategy_name or getattr(strategy, "name", "?"),
        "h": cfg.attack.h_dishonest,
        "seed": net.seed,
        **breakdown.as_row(),
        "cst_ratio": applied_report.cst_ratio,
        "corrupted_count": applied_report.corrupted_count,
        "throughput": episode_throughput(state.tx, applied, applied_report, cfg.throughput),
        "trigger_reason": report.reason,
        "status": status,
    }
    for i, g in enumerate(gtt):
        row[f"g_{i}"] = float(g)
    return dataclasses.replace(
        state,
        episode=e + 1,
        assignment=applied,
        gtt=gtt,
        tx=_tx_for(cfg, state.profiles, e + 1),
        last_report=report,
        last_snapshot=snap,
        metrics_row=row,
    )


def run_episodes(cfg: SimConfig, strategy, episodes: int, name: str | None = None,
                 bvt_sink: list | None = None):
    """Run ``episodes`` steps from the initial state; returns (rows, final_state)."""
    state = initial_state(cfg)
    rows = []
    for _ in range(episodes):
        state = step_episode(state, strategy, cfg, name, bvt_sink)
        rows.append(state.metrics_row)
    return rows, state
