"""Reward-directed diffusion for design optimisation."""

import json as _json

from ._core import (
    NoiseSchedule,
    RddError,
    TreeEnsemble,
    beyond_distribution,
    boxplot_stats,
    fit_trees,
    forward_marginal,
    friction_coefficient,
    hull_resistance,
    load_trees,
    r2_score,
    self_intersections,
    silverman_bandwidth,
    soft_weight,
    synthetic_reward,
)
from ._core import default_config as _default_config
from ._core import run as _run
from ._core import sample as _sample

__all__ = [
    "NoiseSchedule",
    "RddError",
    "TreeEnsemble",
    "beyond_distribution",
    "boxplot_stats",
    "default_config",
    "fit_trees",
    "forward_marginal",
    "friction_coefficient",
    "hull_resistance",
    "load_trees",
    "r2_score",
    "run",
    "sample",
    "self_intersections",
    "silverman_bandwidth",
    "soft_weight",
    "synthetic_reward",
]


def _text(config):
    return config if isinstance(config, str) else _json.dumps(config or {})


def default_config():
    """The default run configuration as a dict."""
    return _json.loads(_default_config())


def run(command, config=None, action=""):
    """Run a pipeline command ("run", "pretrain", ...); returns the exit code."""
    return _run(command, _text(config), action)


def sample(model_path, config=None, n=100, candidates=10, alpha=1.0, seed=0):
    """(designs, rewards) drawn from a saved model with SVDD guidance."""
    return _sample(model_path, _text(config), n, candidates, alpha, seed)
