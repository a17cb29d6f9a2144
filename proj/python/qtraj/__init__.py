"""Quantum-jump trajectories of lattice atoms under global light measurement."""

from ._core import *  # noqa: F401,F403
from ._core import SCHEMA_VERSION
from .artifacts import RunDirectory, load_run_directory

__all__ = ["SCHEMA_VERSION", "RunDirectory", "load_run_directory"]
