"""Deterministic fan-out of replicated simulations over worker processes.

Replication k always derives its seed as ``seed + k``, so per-replication
results never depend on how replications are split across workers; callers
concatenate chunk results in submission order to stay layout independent.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def chunk_spans(reps: int, workers: int) -> list[tuple[int, int]]:
    """Contiguous [start, stop) spans covering range(reps), in order."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    chunks = max(1, min(reps, workers * 4))
    edges = [round(i * reps / chunks) for i in range(chunks + 1)]
    return [(a, b) for a, b in zip(edges, edges[1:]) if b > a]


def map_replication_chunks(fn, args: tuple, reps: int, workers: int) -> list:
    """Run ``fn(*args, start, stop)`` over chunked replication spans.

    Results come back in span order regardless of worker count, so any
    order-sensitive aggregation downstream sees a fixed layout.
    """
    workers = max(1, int(workers))
    spans = chunk_spans(reps, workers)
    if workers == 1 or len(spans) == 1:
        return [fn(*args, a, b) for a, b in spans]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *args, a, b) for a, b in spans]
        return [f.result() for f in futures]
