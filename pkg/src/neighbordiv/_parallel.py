"""Worker-thread plumbing shared by node scoring and parameter sweeps.

``NDIV_THREADS`` sets the number of Python worker threads (default 1).
Threading never changes results: work is partitioned into fixed chunks whose
outputs land in preallocated, disjoint slots, and all randomness is seeded
per work item rather than per worker.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

THREADS_ENV = "NDIV_THREADS"
_MAX_WORKERS = 128


def worker_count() -> int:
    """Worker thread count from the environment; invalid values fall back to 1."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        warnings.warn(f"ignoring non-integer {THREADS_ENV}={raw!r}", stacklevel=2)
        return 1
    return max(1, min(n, _MAX_WORKERS))


def run_chunked(work: Callable[[Sequence], None], chunks: Iterable[Sequence],
                n_workers: int) -> None:
    """Apply ``work`` to every chunk, threaded when ``n_workers`` > 1.

    ``work`` must write its results into preallocated storage owned by the
    chunk; nothing is returned, so ordering cannot leak into the output.
    """
    chunks = [c for c in chunks if len(c)]
    if n_workers <= 1 or len(chunks) <= 1:
        for chunk in chunks:
            work(chunk)
        return
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        # materialize to surface worker exceptions
        list(pool.map(work, chunks))
