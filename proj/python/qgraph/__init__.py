"""Stochastic evolution equations on metric graphs with dynamic boundary noise."""

from ._qgraph import *  # noqa: F401,F403
from ._qgraph import QGraphError, __version__

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
