"""Node-to-node transaction counts and the intra/cross-shard split."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DimensionMismatch, ShardAssignment


@dataclass(frozen=True, eq=False)
class TransactionMatrix:
    phi: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.int64).copy()
        if phi.ndim != 2 or phi.shape[0] != phi.shape[1]:
            raise DimensionMismatch("transaction matrix must be square")
        if not np.array_equal(phi, phi.T):
            raise ValueError("transaction matrix must be symmetric")
        if np.any(np.diag(phi) != 0):
            raise ValueError("transaction matrix must have a zero diagonal")
        if np.any(phi < 0):
            raise ValueError("transaction counts must be non-negative")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def n(self) -> int:
        return self.phi.shape[0]

    def to_csv(self, path: str | Path) -> None:
        np.savetxt(path, self.phi, fmt="%d", delimiter=",")

    @classmethod
    def from_csv(cls, path: str | Path) -> "TransactionMatrix":
        return cls(np.loadtxt(path, dtype=np.int64, delimiter=",", ndmin=2))


@dataclass(frozen=True)
class TxStats:
    phi_in: int
    phi_cr: int
    ratio: float


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def generate(n_total: int, dishonest: np.ndarray, rng: np.random.Generator,
             base_mean: float = 10.0, base_sd: float = 3.0,
             collusion_boost: float = 10.0) -> TransactionMatrix:
    """Normal base traffic plus positive noise on every dishonest-dishonest pair.

    Base draws and collusion noise use separate passes over the same
    generator, so the honest part of the matrix does not depend on ``h``
    when the caller hands the same stream to runs differing only in ``h``.
    """
    iu = np.triu_indices(n_total, k=1)
    base = rng.normal(base_mean, base_sd, size=len(iu[0]))
    counts = _round_half_away(np.maximum(base, 0.0))
    noise = np.abs(rng.normal(collusion_boost, collusion_boost / 4, size=len(iu[0])))
    bad = np.asarray(dishonest, dtype=bool)
    pair_bad = bad[iu[0]] & bad[iu[1]]
    if collusion_boost > 0:
        counts = counts + np.where(pair_bad, _round_half_away(noise), 0.0)
    phi = np.zeros((n_total, n_total), dtype=np.int64)
    phi[iu] = counts.astype(np.int64)
    phi = phi + phi.T
    return TransactionMatrix(phi)


def cst_stats(phi: TransactionMatrix, a: ShardAssignment) -> TxStats:
    if len(a) != phi.n:
        raise DimensionMismatch(f"assignment covers {len(a)} nodes, matrix {phi.n}")
    total = int(phi.phi.sum())
    same = a.assignment[:, None] == a.assignment[None, :]
    within = int(phi.phi[same].sum())
    phi_cr = (total - within) // 2
    phi_in = within // 2
    denom = phi_cr + phi_in
    ratio = phi_cr / denom if denom > 0 else 0.0
    return TxStats(phi_in, phi_cr, ratio)


def batch_cst_ratio(phi: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    """CST ratio for many assignments at once (rows of ``vecs``)."""
    total = phi.sum()
    if total == 0:
        return np.zeros(len(vecs))
    same = vecs[:, :, None] == vecs[:, None, :]
    within = np.einsum("bij,ij->b", same, phi)
    return (total - within) / total
