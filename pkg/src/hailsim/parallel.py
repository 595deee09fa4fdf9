"""Replica fan-out: order-preserving map over an optional process pool."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def parallel_map(fn, items, workers: int = 1) -> list:
    """Map `fn` over `items`, preserving order.

    With workers <= 1 this is a plain loop; otherwise items are distributed
    over a process pool.  `fn` must be a module-level callable and the items
    picklable.  Results are identical either way because each item carries its
    own random stream.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
