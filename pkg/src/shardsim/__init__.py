"""Deterministic simulator of trust-driven resharding in a sharded
permissioned blockchain under collusion attacks."""

from .config import SimConfig, ConfigError, load_config, dump_config
from .core import ShardAssignment, new_rng, validate_assignment
from .environment import run_episodes, step_episode, initial_state

__version__ = "0.1.0"

__all__ = ["SimConfig", "ConfigError", "load_config", "dump_config",
           "ShardAssignment", "new_rng", "validate_assignment",
           "run_episodes", "step_episode", "initial_state"]
