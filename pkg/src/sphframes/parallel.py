"""Thread-pool helper with deterministic result ordering.

Worker counts come from an explicit argument, the SPHFRAMES_THREADS
environment variable, or default to 1 (sequential). Results are always
returned in input order so that reductions downstream stay reproducible
regardless of scheduling.
"""

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import ConfigurationError


def resolve_threads(threads=None):
    """Return the effective worker count (>= 1)."""
    if threads is None:
        env = os.environ.get("SPHFRAMES_THREADS", "").strip()
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ConfigurationError(
                    f"SPHFRAMES_THREADS must be an integer, got {env!r}"
                ) from None
        else:
            threads = 1
    if threads < 1:
        raise ConfigurationError(f"thread count must be >= 1, got {threads}")
    return threads


def thread_map(fn, items, threads=None):
    """Map ``fn`` over ``items``, preserving order.

    With one worker this is a plain loop; otherwise a ThreadPoolExecutor is
    used. Exceptions from workers propagate to the caller.
    """
    workers = resolve_threads(threads)
    items = list(items)
    if workers == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
