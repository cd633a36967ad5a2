"""Orchestration of the full experiment as composable commands."""
from .cli import main
from .commands import (Context, cmd_all, cmd_explain, cmd_features, cmd_performance, cmd_represent,
                       cmd_train_eval)
from .config import PROFILES, RunConfig, load_config

__all__ = ["main", "Context", "cmd_all", "cmd_explain", "cmd_features", "cmd_performance",
           "cmd_represent", "cmd_train_eval", "PROFILES", "RunConfig", "load_config"]
