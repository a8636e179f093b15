"""Run parameters, loaded from TOML with CLI/env overrides applied on top.

Every config is a frozen dataclass whose ``__post_init__`` enforces its
invariants and raises :class:`ConfigError` naming the offending field.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _prob(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0):
        raise ConfigError(name, f"must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class NetworkConfig:
    n_total: int = 16
    d_shards: int = 2
    n_min: int = 4
    leads_per_episode: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.d_shards < 1:
            raise ConfigError("d_shards", "need at least one shard")
        # Four is the operational minimum; smaller values exist only so the
        # exhaustive oracle can run on toy networks (N=4, N=6).
        if self.n_min < 1:
            raise ConfigError("n_min", "must be positive")
        if self.n_total < self.d_shards * self.n_min:
            raise ConfigError(
                "n_total",
                f"{self.n_total} nodes cannot fill {self.d_shards} shards of {self.n_min}",
            )
        if self.leads_per_episode < 1:
            raise ConfigError("leads_per_episode", "must be a positive integer")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed", "must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class AttackConfig:
    h_dishonest: int = 0
    fail_prob: float = 0.2
    tau: float = 0.1
    kappa: float = 1.0
    w_g: float = 1.0
    w_u: float = 1.0
    # "random": dishonest identities scattered; "concentrated": packed into shard 0
    placement: str = "random"

    def __post_init__(self):
        if self.h_dishonest < 0:
            raise ConfigError("h_dishonest", "must be non-negative")
        _prob("fail_prob", self.fail_prob)
        _prob("tau", self.tau)
        _prob("kappa", self.kappa)
        for name in ("w_g", "w_u"):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise ConfigError(name, f"must lie in (0, 1], got {v}")
        if self.placement not in ("random", "concentrated"):
            raise ConfigError("placement", f"unknown placement {self.placement!r}")


@dataclass(frozen=True)
class TrustConfig:
    alpha: float = 0.0
    beta: float = 1.0
    mu: float = 0.0
    gamma: float = 0.9
    rho_t: float = 0.67

    def __post_init__(self):
        for name in ("alpha", "beta", "mu"):
            if getattr(self, name) < 0:
                raise ConfigError(name, "mix weights must be non-negative")
        if not math.isclose(self.alpha + self.beta + self.mu, 1.0, abs_tol=1e-12):
            raise ConfigError("alpha", "alpha + beta + mu must equal 1")
        if not (0.0 < self.gamma <= 1.0):
            raise ConfigError("gamma", "must lie in (0, 1]")
        if not (0.0 < self.rho_t < 1.0):
            raise ConfigError("rho_t", "must lie in (0, 1)")


@dataclass(frozen=True)
class RiskConfig:
    rho_cr: float = 0.4

    def __post_init__(self):
        if not (0.0 < self.rho_cr < 1.0):
            raise ConfigError("rho_cr", "must lie in (0, 1)")


@dataclass(frozen=True)
class RewardConfig:
    e_a: float = 1.0
    e_b: float = 1.0
    lambda_a: float = 10.0
    lambda_b: float = 0.9
    lambda_c: float = 5.0
    balance_slack: int = 1

    def __post_init__(self):
        if self.e_a <= 0:
            raise ConfigError("e_a", "must be positive")
        if self.e_b <= 0:
            raise ConfigError("e_b", "must be positive")
        if self.lambda_a <= 0:
            raise ConfigError("lambda_a", "must be positive")
        if not (0.0 < self.lambda_b <= 1.0):
            raise ConfigError("lambda_b", "must lie in (0, 1]")
        if self.lambda_c < 0:
            raise ConfigError("lambda_c", "must be non-negative")
        if self.balance_slack < 0:
            raise ConfigError("balance_slack", "must be non-negative")

    @property
    def violation_penalty(self) -> float:
        return -(2 * self.e_a + 2 * self.e_b)


@dataclass(frozen=True)
class TxConfig:
    base_mean: float = 10.0
    base_sd: float = 3.0
    collusion_boost: float = 10.0
    resample: bool = True

    def __post_init__(self):
        if self.base_mean <= 0:
            raise ConfigError("base_mean", "must be positive")
        if self.base_sd < 0:
            raise ConfigError("base_sd", "must be non-negative")
        if self.collusion_boost < 0:
            raise ConfigError("collusion_boost", "must be non-negative")


@dataclass(frozen=True)
class DqnConfig:
    eps_start: float = 0.3
    eps_end: float = 0.02
    eps_decay_steps: int = 40
    replay_capacity: int = 2048
    batch_size: int = 64
    rollouts_per_epoch: int = 32
    updates_per_epoch: int = 4
    lr: float = 1e-3
    target_sync: int = 10
    epochs: int = 40
    hidden: int = 64
    grad_clip: float = 5.0
    momentum: float = 0.9

    def __post_init__(self):
        _prob("eps_start", self.eps_start)
        _prob("eps_end", self.eps_end)
        for name in ("eps_decay_steps", "replay_capacity", "batch_size",
                     "rollouts_per_epoch", "updates_per_epoch", "target_sync",
                     "epochs", "hidden"):
            if getattr(self, name) < 1:
                raise ConfigError(name, "must be positive")
        if self.lr <= 0:
            raise ConfigError("lr", "must be positive")
        if self.grad_clip <= 0:
            raise ConfigError("grad_clip", "must be positive")
        if not (0.0 <= self.momentum < 1.0):
            raise ConfigError("momentum", "must lie in [0, 1)")

    def epsilon(self, step: int) -> float:
        frac = min(1.0, step / self.eps_decay_steps)
        return self.eps_start + frac * (self.eps_end - self.eps_start)


@dataclass(frozen=True)
class PpoConfig:
    clip_ratio: float = 0.2
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    minibatches: int = 2
    update_epochs: int = 2
    lr: float = 3e-4
    rollout_batch: int = 32
    epochs: int = 40
    hidden: int = 64
    grad_clip: float = 5.0
    momentum: float = 0.9

    def __post_init__(self):
        if not (0.0 < self.clip_ratio < 1.0):
            raise ConfigError("clip_ratio", "must lie in (0, 1)")
        for name in ("entropy_coef", "value_coef"):
            if getattr(self, name) < 0:
                raise ConfigError(name, "must be non-negative")
        for name in ("minibatches", "update_epochs", "rollout_batch", "epochs", "hidden"):
            if getattr(self, name) < 1:
                raise ConfigError(name, "must be positive")
        if self.lr <= 0:
            raise ConfigError("lr", "must be positive")
        if self.grad_clip <= 0:
            raise ConfigError("grad_clip", "must be positive")
        if not (0.0 <= self.momentum < 1.0):
            raise ConfigError("momentum", "must lie in [0, 1)")


@dataclass(frozen=True)
class ThroughputModel:
    cst_cost: float = 2.0

    def __post_init__(self):
        if self.cst_cost < 1:
            raise ConfigError("cst_cost", "must be at least 1")


@dataclass(frozen=True)
class SimConfig:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    attack: AttackConfig = field(default_factory=AttackConfig)
    trust: TrustConfig = field(default_factory=TrustConfig)
    risk: RiskConfig = field(default_factory=RiskConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    tx: TxConfig = field(default_factory=TxConfig)
    dqn: DqnConfig = field(default_factory=DqnConfig)
    ppo: PpoConfig = field(default_factory=PpoConfig)
    throughput: ThroughputModel = field(default_factory=ThroughputModel)

    def __post_init__(self):
        if self.attack.h_dishonest > self.network.n_total:
            raise ConfigError("h_dishonest", "cannot exceed n_total")

    def replace(self, **sections: Mapping[str, Any]) -> "SimConfig":
        """Return a copy with per-section field overrides, e.g.
        ``cfg.replace(attack={"h_dishonest": 4})``."""
        updated = {}
        for name, overrides in sections.items():
            current = getattr(self, name)
            updated[name] = dataclasses.replace(current, **overrides)
        return dataclasses.replace(self, **updated)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_SECTIONS = {f.name: f.type for f in dataclasses.fields(SimConfig)}


def config_from_dict(data: Mapping[str, Any]) -> SimConfig:
    sections = {}
    for name, body in data.items():
        if name not in _SECTIONS:
            raise ConfigError(name, "unknown config section")
        section_cls = type(getattr(SimConfig(), name))
        known = {f.name for f in dataclasses.fields(section_cls)}
        for key in body:
            if key not in known:
                raise ConfigError(f"{name}.{key}", "unknown field")
        sections[name] = section_cls(**body)
    return SimConfig(**sections)


def load_config(path: str | Path) -> SimConfig:
    with open(path, "rb") as fh:
        return config_from_dict(tomllib.load(fh))


def dump_config(cfg: SimConfig) -> str:
    """Serialize as TOML (flat sections of scalars, so no writer dependency)."""
    lines = []
    for name, body in cfg.to_dict().items():
        lines.append(f"[{name}]")
        for key, value in body.items():
            if isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, str):
                text = f'"{value}"'
            else:
                text = repr(value)
            lines.append(f"{key} = {text}")
        lines.append("")
    return "\n".join(lines)
