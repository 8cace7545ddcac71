"""Worker-count cap for parallel nearest-neighbour queries.

The environment variable ``HOLOIFS_THREADS`` bounds the number of worker
threads used for bulk KD-tree queries.  Unset or invalid values fall back to
a single worker, which keeps default runs deterministic and laptop-friendly.
Results never depend on the worker count, only wall-clock time does.
"""

from __future__ import annotations

import os

_ENV_VAR = "HOLOIFS_THREADS"


def thread_cap() -> int:
    """Number of query workers to use (>= 1), read from ``HOLOIFS_THREADS``."""
    raw = os.environ.get(_ENV_VAR, "")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)
