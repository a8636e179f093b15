"""Command-line front end: ``run``, ``oracle``, ``validate``, ``dump-config``.

Precedence, lowest to highest: built-in defaults, the ``--config`` TOML
file, ``SHARDSIM_*`` environment variables, command-line flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import ConfigError, SimConfig, dump_config, load_config
from .harness import (STRATEGIES, ExperimentPlan, TooLarge, brute_force_oracle,
                      run_experiment, snapshot_from_dict, snapshot_to_dict)

ENV_PREFIX = "SHARDSIM_"
# flag name -> environment variable suffix
ENV_FLAGS = ("config", "strategy", "nodes", "shards", "dishonest", "seeds",
             "episodes", "out", "jobs")


def parse_int_list(text: str) -> list[int]:
    """``"3"``, ``"0,2,5"`` or the inclusive range ``"0-9"``."""
    values: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            values.extend(range(int(lo), int(hi) + 1))
        else:
            values.append(int(part))
    return values


def _apply_env(args: argparse.Namespace, environ=os.environ) -> None:
    for name in ENV_FLAGS:
        if getattr(args, name, None) is None:
            value = environ.get(ENV_PREFIX + name.upper())
            if value is not None:
                setattr(args, name, value)


def effective_config(args: argparse.Namespace) -> SimConfig:
    cfg = load_config(args.config) if args.config else SimConfig()
    network = {}
    if args.nodes is not None:
        network["n_total"] = int(args.nodes)
    if args.shards is not None:
        network["d_shards"] = int(args.shards)
    seeds = parse_int_list(args.seeds) if args.seeds is not None else []
    if len(seeds) == 1:
        network["seed"] = seeds[0]
    overrides = {"network": network} if network else {}
    dishonest = parse_int_list(args.dishonest) if args.dishonest is not None else []
    if len(dishonest) == 1:
        overrides["attack"] = {"h_dishonest": dishonest[0]}
    return cfg.replace(**overrides) if overrides else cfg


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--strategy", help=f"comma list from {{{','.join(STRATEGIES)}}}")
    p.add_argument("--nodes", help="total node count N")
    p.add_argument("--shards", help="shard count D")
    p.add_argument("--dishonest", help="dishonest count(s) h, e.g. 4 or 0-5")
    p.add_argument("--seeds", help="seed list, e.g. 0-9 or 1,3,7")
    p.add_argument("--episodes", help="episodes per run")
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shardsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)
    run = sub.add_parser("run", help="execute a strategy x h x seed sweep")
    _common(run)
    run.add_argument("--debug-bvt", action="store_true", help="also dump every BVT as JSON")
    oracle = sub.add_parser("oracle", help="brute-force the best allocation of a snapshot")
    _common(oracle)
    oracle.add_argument("--snapshot", help="snapshot JSON; default: one episode from the config")
    oracle.add_argument("--save-snapshot", help="write the snapshot used to this path")
    for verb, text in (("validate", "check a config"), ("dump-config", "print the effective config")):
        _common(sub.add_parser(verb, help=text))
    return parser


def cmd_run(args) -> int:
    cfg = effective_config(args)
    strategies = [s.strip() for s in (args.strategy or "random").split(",") if s.strip()]
    hs = parse_int_list(args.dishonest) if args.dishonest is not None else [cfg.attack.h_dishonest]
    seeds = parse_int_list(args.seeds) if args.seeds is not None else [cfg.network.seed]
    episodes = int(args.episodes) if args.episodes is not None else 100
    plan = ExperimentPlan.sweep(cfg, strategies, hs, seeds, episodes,
                                args.out or "out", args.debug_bvt)
    index = run_experiment(plan, jobs=int(args.jobs or 1))
    print(f"{index['count']} runs, {index['failed']} failed -> {Path(plan.out_dir) / 'index.json'}")
    for rec in index["runs"]:
        if rec["status"] != "ok":
            print(f"  {rec['id']}: {rec['error']}", file=sys.stderr)
    return 0 if index["failed"] == 0 else 1


def cmd_oracle(args) -> int:
    cfg = effective_config(args)
    if args.snapshot:
        snap = snapshot_from_dict(json.loads(Path(args.snapshot).read_text()))
    else:
        from .baselines import RandomStrategy
        from .environment import run_episodes
        _, state = run_episodes(cfg, RandomStrategy(), int(args.episodes or 1))
        snap = state.last_snapshot
    if args.save_snapshot:
        Path(args.save_snapshot).write_text(json.dumps(snapshot_to_dict(snap)) + "\n")
    try:
        best, reward = brute_force_oracle(snap, cfg)
    except TooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps({"assignment": best.assignment.tolist(), "reward": reward}))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _apply_env(args)
    try:
        if args.verb == "run":
            return cmd_run(args)
        if args.verb == "oracle":
            return cmd_oracle(args)
        cfg = effective_config(args)
        if args.verb == "validate":
            print("ok")
        else:
            sys.stdout.write(dump_config(cfg))
        return 0
    except ConfigError as exc:
        print(f"config error in {exc.field}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
