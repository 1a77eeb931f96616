"""Continuous-time majority-rule dynamics on block hypergraphs of Z and Z^2."""
from . import _backend
from .dynamics import (
    EventLog,
    MajorityRule,
    Observer,
    VoterRule,
    generate_event_log,
    majority_update,
    replay_forward,
    run,
    voter_update,
)
from .lattice import Configuration, HyperedgeFamily, LatticeGeometry, read_grid_text, write_grid_text
from .rng import RngStream

__version__ = "0.1.0"


def backend() -> str:
    """Name of the kernel implementation in use: ``"cython"`` or ``"python"``."""
    return _backend.name()


__all__ = [
    "Configuration", "EventLog", "HyperedgeFamily", "LatticeGeometry", "MajorityRule", "Observer",
    "RngStream", "VoterRule", "backend", "generate_event_log", "majority_update", "read_grid_text",
    "replay_forward", "run", "voter_update", "write_grid_text",
]
