"""Backend selection for the hot loops.

``get_backend()`` returns the numba module unless ``BRTREE_NO_NUMBA`` is set or numba
cannot be imported; both expose the same functions with identical results.
"""

from __future__ import annotations

import importlib

from .. import config
from ._common import (STAT_AT_LEAST, STAT_BRANCHES, STAT_DEPTH, STAT_EXACTLY,  # noqa: F401
                      STAT_POSITION, ERROR_MESSAGES)

_loaded = {}


def get_backend(name: str | None = None):
    """Kernel module by name ("numba" / "numpy"); default follows the environment."""
    if name is None:
        name = "numpy" if config.numba_disabled() else "numba"
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown kernel backend {name!r}")
    if name not in _loaded:
        try:
            _loaded[name] = importlib.import_module(f"._{name}", __name__)
        except ImportError:
            if name == "numba":
                return get_backend("numpy")
            raise
    return _loaded[name]
