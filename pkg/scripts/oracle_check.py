#!/usr/bin/env python3
"""Compare learned proposals with the exhaustive optimum on small networks.

For N in {6, 8}, D = 2 and several training budgets, reports how often the
raw greedy (DQN) or mode (PPO) proposal, and the best allocation sampled
during training, land within 5% of the brute-force optimum.

    python scripts/oracle_check.py --epochs 40,100,300
"""

import argparse

import numpy as np

from shardsim.cli import parse_int_list
from shardsim.config import SimConfig
from shardsim.core import new_rng
from shardsim.drl import DrlStrategy, propose_from
from shardsim.environment import run_episodes
from shardsim.harness import brute_force_oracle, make_strategy
from shardsim.reward import batch_rewards


def snapshots(count: int):
    for n in (6, 8):
        for k in range(count):
            cfg = SimConfig().replace(network={"n_total": n, "d_shards": 2, "n_min": 2,
                                               "seed": 100 + k},
                                      attack={"h_dishonest": k % 3})
            _, state = run_episodes(cfg, make_strategy("random", cfg), 3)
            yield cfg, state.last_snapshot


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epochs", default="40")
    ap.add_argument("--snapshots", type=int, default=10, help="per network size")
    ap.add_argument("--train-seeds", type=int, default=2)
    args = ap.parse_args()
    snaps = [(cfg, snap, brute_force_oracle(snap, cfg)[1]) for cfg, snap in snapshots(args.snapshots)]
    for epochs in parse_int_list(args.epochs):
        for kind in ("dqn", "ppo"):
            greedy, seen = [], []
            for cfg, snap, best in snaps:
                cutoff = best - 0.05 * abs(best)
                for seed in range(args.train_seeds):
                    strat = DrlStrategy(kind, cfg, seed=seed, use_best_seen=False)
                    res = strat.train(snap, new_rng(seed, "oracle"), epochs)
                    vec, _ = propose_from(res, cfg)
                    greedy.append(batch_rewards(snap, vec[None, :], cfg)[0] >= cutoff)
                    seen.append(res.best_reward >= cutoff)
            print(f"epochs={epochs:4d} {kind}: greedy {np.mean(greedy):.0%}  "
                  f"best-seen {np.mean(seen):.0%}  ({len(greedy)} pairs)")


if __name__ == "__main__":
    main()
