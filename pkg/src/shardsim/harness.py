"""Experiment orchestration: plans, sweeps, deterministic output files, and
the exhaustive oracle used to score learned proposals on small networks."""

from __future__ import annotations

import csv
import io
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .baselines import CommunityStrategy, RandomStrategy, TrustStrategy
from .config import SimConfig, config_from_dict
from .core import ShardAssignment, is_valid
from .environment import run_episodes
from .metrics import summarize
from .reward import Snapshot, batch_components, batch_rewards

STRATEGIES = ("random", "community", "trust", "dqn", "ppo")
ORACLE_CAP = 2**20
INDEX_NAME = "index.json"


class TooLarge(ValueError):
    def __init__(self, n: int, d: int):
        super().__init__(f"{d}^{n} assignments exceed the oracle cap of {ORACLE_CAP}")
        self.n, self.d = n, d


def make_strategy(name: str, cfg: SimConfig):
    if name == "random":
        return RandomStrategy()
    if name == "community":
        return CommunityStrategy()
    if name == "trust":
        return TrustStrategy()
    if name in ("dqn", "ppo"):
        from .drl import DrlStrategy
        return DrlStrategy(name, cfg)
    raise ValueError(f"unknown strategy {name!r}; choose from {', '.join(STRATEGIES)}")


@dataclass(frozen=True)
class RunSpec:
    """One (strategy, h, seed) entry; ``config`` is the full effective config dict."""
    strategy: str
    config: dict
    episodes: int

    @property
    def run_id(self) -> str:
        net, atk = self.config["network"], self.config["attack"]
        return f"{self.strategy}_n{net['n_total']}_d{net['d_shards']}_h{atk['h_dishonest']}_s{net['seed']}"

    def sim_config(self) -> SimConfig:
        return config_from_dict(self.config)

    def to_dict(self) -> dict:
        return {"strategy": self.strategy, "episodes": self.episodes, "config": self.config}

    @classmethod
    def from_dict(cls, data: dict) -> "RunSpec":
        return cls(data["strategy"], data["config"], int(data["episodes"]))


@dataclass
class ExperimentPlan:
    runs: list[RunSpec] = field(default_factory=list)
    out_dir: Path = Path("out")
    debug_bvt: bool = False

    @classmethod
    def sweep(cls, base: SimConfig, strategies, h_values, seeds, episodes: int,
              out_dir: str | Path, debug_bvt: bool = False) -> "ExperimentPlan":
        runs = []
        for name, h, seed in itertools.product(strategies, h_values, seeds):
            if name not in STRATEGIES:
                raise ValueError(f"unknown strategy {name!r}")
            cfg = base.replace(network={"seed": int(seed)}, attack={"h_dishonest": int(h)})
            runs.append(RunSpec(name, cfg.to_dict(), int(episodes)))
        return cls(runs, Path(out_dir), debug_bvt)


def rows_to_csv(rows: list[dict]) -> str:
    """Fixed column order (that of the row dicts); floats via repr for exact round-trip."""
    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.writer(buf, lineterminator="\n")
    cols = list(rows[0])
    writer.writerow(cols)
    for r in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in (r[c] for c in cols)])
    return buf.getvalue()


def execute_run(spec: RunSpec, out_dir: Path, debug_bvt: bool = False) -> dict:
    """Run one plan entry and write its artifacts; returns its index record."""
    record: dict[str, Any] = {"id": spec.run_id, "entry": spec.to_dict()}
    try:
        cfg = spec.sim_config()
        strategy = make_strategy(spec.strategy, cfg)
        bvt_sink = [] if debug_bvt else None
        rows, state = run_episodes(cfg, strategy, spec.episodes, bvt_sink=bvt_sink)
        files = {}
        csv_path = out_dir / f"{spec.run_id}.csv"
        csv_path.write_text(rows_to_csv(rows))
        files["episodes"] = csv_path.name
        summary = summarize(rows, cfg.network.d_shards, min(20, max(1, len(rows))))
        summary.update({"strategy": spec.strategy, "h": cfg.attack.h_dishonest,
                        "seed": cfg.network.seed})
        summary_path = out_dir / f"{spec.run_id}.summary.json"
        summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        files["summary"] = summary_path.name
        curve = getattr(strategy, "curve", None)
        if curve:
            curve_path = out_dir / f"{spec.run_id}.curve.csv"
            curve_path.write_text(rows_to_csv(curve))
            files["curve"] = curve_path.name
            policy_path = out_dir / f"{spec.run_id}.policy.json"
            policy_path.write_text(json.dumps(strategy.policy_params()) + "\n")
            files["policy"] = policy_path.name
        if bvt_sink is not None:
            bvt_path = out_dir / f"{spec.run_id}.bvt.json"
            bvt_path.write_text(json.dumps(bvt_sink) + "\n")
            files["bvt"] = bvt_path.name
        record.update(status="ok", files=files)
    except Exception as exc:  # recorded in the index; other runs continue
        record.update(status="failed", error=f"{type(exc).__name__}: {exc}")
    return record


def _execute(args):
    return execute_run(*args)


def run_experiment(plan: ExperimentPlan, jobs: int = 1) -> dict:
    """Execute every entry, then write the index once. Returns the index dict."""
    out = Path(plan.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(spec, out, plan.debug_bvt) for spec in plan.runs]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_execute, tasks))
    else:
        records = [_execute(t) for t in tasks]
    index = {"runs": records, "count": len(records), "debug_bvt": plan.debug_bvt,
             "failed": sum(r["status"] != "ok" for r in records)}
    (out / INDEX_NAME).write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
    return index


def plan_from_index(path: str | Path, out_dir: str | Path | None = None) -> ExperimentPlan:
    """Rebuild a plan (or subset, by editing the file) from a written index."""
    path = Path(path)
    data = json.loads(path.read_text())
    runs = [RunSpec.from_dict(r["entry"]) for r in data["runs"]]
    return ExperimentPlan(runs, Path(out_dir) if out_dir else path.parent,
                          bool(data.get("debug_bvt", False)))


def enumerate_valid(n: int, d: int, n_min: int) -> np.ndarray:
    """All assignments in lexicographic order that meet the shard-size floor."""
    if d**n > ORACLE_CAP:
        raise TooLarge(n, d)
    grid = np.array(list(itertools.product(range(d), repeat=n)), dtype=np.int64)
    sizes = np.stack([(grid == x).sum(axis=1) for x in range(d)], axis=1)
    return grid[(sizes >= n_min).all(axis=1)]


def brute_force_oracle(snap: Snapshot, cfg: SimConfig, chunk: int = 4096):
    """Exhaustive argmax of the total reward; ties go to the lexicographically
    smallest assignment. Returns (ShardAssignment, best reward)."""
    vecs = enumerate_valid(snap.n, snap.d, cfg.network.n_min)
    if len(vecs) == 0:
        raise ValueError("no assignment satisfies the shard-size floor")
    best_r, best_i = -np.inf, -1
    for start in range(0, len(vecs), chunk):
        r = batch_rewards(snap, vecs[start:start + chunk], cfg)
        k = int(np.argmax(r))  # first maximum = lexicographically smallest
        if r[k] > best_r:
            best_r, best_i = float(r[k]), start + k
    return ShardAssignment(vecs[best_i], snap.d), best_r


def snapshot_to_dict(snap: Snapshot) -> dict:
    return {
        "gtt": snap.gtt.tolist(),
        "tx": snap.tx.phi.tolist(),
        "assignment": snap.assignment.assignment.tolist(),
        "d_shards": snap.d,
        "dishonest": [bool(p.dishonest) for p in snap.profiles],
    }


def snapshot_from_dict(data: dict) -> Snapshot:
    from .consensus import normalize_trust
    from .core import make_profiles, Honesty
    from .txmatrix import TransactionMatrix

    gtt = np.asarray(data["gtt"], dtype=float)
    n = len(gtt)
    dishonest = data.get("dishonest", [False] * n)
    profiles = make_profiles(n, [i for i, flag in enumerate(dishonest) if flag])
    return Snapshot(normalize_trust(gtt), gtt,
                    TransactionMatrix(np.asarray(data["tx"], dtype=np.int64)),
                    ShardAssignment(np.asarray(data["assignment"], dtype=np.int64), int(data["d_shards"])),
                    profiles)
