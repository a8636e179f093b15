#!/usr/bin/env python3
"""Strategy sweep with a per-strategy summary table.

Writes the usual harness outputs (per-run CSV, summary JSON, index.json) and
then prints, per strategy: mean reward over the last 20 episodes, per-seed
median CST ratio and cross-shard trust variance, and mean corrupted shards.

    python scripts/run_sweep.py --dishonest 4 --seeds 0-9 --episodes 100 --out out/h4
"""

import argparse
import csv
import json
from pathlib import Path

import numpy as np

from shardsim.cli import parse_int_list
from shardsim.config import SimConfig, load_config
from shardsim.harness import STRATEGIES, ExperimentPlan, run_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--strategy", default=",".join(STRATEGIES))
    ap.add_argument("--dishonest", default="4")
    ap.add_argument("--seeds", default="0-9")
    ap.add_argument("--episodes", type=int, default=100)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="out/sweep")
    args = ap.parse_args()

    base = load_config(args.config) if args.config else SimConfig()
    names = args.strategy.split(",")
    plan = ExperimentPlan.sweep(base, names, parse_int_list(args.dishonest),
                                parse_int_list(args.seeds), args.episodes, args.out)
    index = run_experiment(plan, jobs=args.jobs)
    out = Path(args.out)
    table: dict[tuple, list] = {}
    for rec in index["runs"]:
        if rec["status"] != "ok":
            print(f"{rec['id']}: {rec['error']}")
            continue
        with open(out / rec["files"]["episodes"]) as fh:
            rows = list(csv.DictReader(fh))
        entry = rec["entry"]
        key = (entry["strategy"], entry["config"]["attack"]["h_dishonest"])
        col = lambda k: np.array([float(r[k]) for r in rows])  # noqa: E731
        table.setdefault(key, []).append((col("reward")[-20:].mean(), np.median(col("cst_ratio")),
                                          np.median(col("omega_cr")), col("corrupted_count").mean()))
    print(f"{'strategy':10} {'h':>2} {'tail reward':>12} {'phi':>7} {'omega_cr':>9} {'corrupt':>8}")
    for (name, h), vals in sorted(table.items()):
        m = np.mean(vals, axis=0)
        print(f"{name:10} {h:>2} {m[0]:12.3f} {m[1]:7.3f} {m[2]:9.2e} {m[3]:8.3f}")
    (out / "table.json").write_text(json.dumps(
        {f"{k[0]}/h{k[1]}": np.mean(v, axis=0).tolist() for k, v in table.items()}, indent=2))


if __name__ == "__main__":
    main()
