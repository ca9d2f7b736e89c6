"""Order-preserving map over independent trials.

Every trial is a pure function of its index, so results come back in index
order whatever the worker count and the outputs are byte-identical.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def trial_map(fn, items, workers: int = 1, chunksize: int | None = None) -> list:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    workers = min(workers, len(items))
    if chunksize is None:
        chunksize = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
