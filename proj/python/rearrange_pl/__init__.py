"""Rearrangements and functional inequality chains on uniform grids."""

import json

from . import _core
from ._core import (
    ConfigError,
    Error,
    Grid,
    PreconditionError,
    Rearrangement,
    integrate,
    phi,
    phi_inv,
    profile_csv,
    q_lambda,
    rearrange,
    sup_convolve,
)

__all__ = [
    "ConfigError",
    "Error",
    "Grid",
    "PreconditionError",
    "Rearrangement",
    "bbl_chain",
    "dominance_check",
    "integrate",
    "lsi_chain",
    "phi",
    "phi_inv",
    "pli_chain",
    "profile_csv",
    "q_lambda",
    "rearrange",
    "run_config",
    "run_convergence",
    "sup_convolve",
]


def pli_chain(spec, f, g, t, method="auto"):
    return json.loads(_core.pli_chain(spec, f, g, t, method))


def bbl_chain(spec, f, g, t, p, method="auto"):
    return json.loads(_core.bbl_chain(spec, f, g, t, p, method))


def lsi_chain(grid, f, lam, target):
    return json.loads(_core.lsi_chain(grid, f, lam, target))


def dominance_check(grid, f, lam, levels, target):
    return json.loads(_core.dominance_check(grid, f, lam, levels, target))


def run_config(config):
    """Run the chain of a config given as a dict or JSON text."""
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_core.run_config(text))


def run_convergence(config):
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_core.run_convergence(text))
