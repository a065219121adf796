"""Process-level settings shared by the command line and the library."""

from __future__ import annotations

import os

import numba

from .errors import ParameterError

THREADS_ENV = "ROUGHKIT_THREADS"


def configure_threads(requested: int | None = None) -> int:
    """Apply ``requested`` (or ``$ROUGHKIT_THREADS``) to numba's pool; returns the count in use.

    Values above the pool size numba was started with are clipped.
    """
    if requested is None:
        env = os.environ.get(THREADS_ENV, "").strip()
        requested = int(env) if env else None
    if requested is None:
        return numba.config.NUMBA_NUM_THREADS
    if requested < 1:
        raise ParameterError("thread count must be positive")
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the bundled TBB is often too old and only produces a warning
        numba.config.THREADING_LAYER = "workqueue"
    n = min(requested, numba.config.NUMBA_NUM_THREADS)
    numba.set_num_threads(n)
    return n
