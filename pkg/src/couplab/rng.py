"""Reproducible random streams and order-independent work partitioning.

Every unit of work owns a Philox stream keyed by ``(seed, *path)``, so the
numbers a unit sees do not depend on which worker runs it or in which
order units complete.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

UNIT_SIZE = 512


def stream(seed: int, *path: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def units(n_items: int, unit_size: int = UNIT_SIZE):
    """Split ``range(n_items)`` into ``(unit_index, start, stop)`` chunks."""
    return [(u, s, min(s + unit_size, n_items))
            for u, s in enumerate(range(0, n_items, unit_size))]


def map_units(fn, n_items: int, seed: int, *, workers: int = 1, unit_size: int = UNIT_SIZE,
              tag: int = 0, args=()):
    """Run ``fn(rng, start, stop, *args)`` on every unit; results come back in unit order."""
    return list(iter_units(fn, n_items, seed, workers=workers, unit_size=unit_size, tag=tag, args=args))


def iter_units(fn, n_items: int, seed: int, *, workers: int = 1, unit_size: int = UNIT_SIZE,
               tag: int = 0, args=()):
    """Like ``map_units`` but yields results in unit order as they become available.

    Closing the generator early (e.g. on interrupt) cancels units not yet started.
    """
    jobs = [(fn, seed, tag, u, s, e, args) for u, s, e in units(n_items, unit_size)]
    if workers <= 1 or len(jobs) <= 1:
        for job in jobs:
            yield _run(job)
        return
    pool = ProcessPoolExecutor(max_workers=workers)
    try:
        futures = [pool.submit(_run, job) for job in jobs]
        for f in futures:
            yield f.result()
    finally:
        pool.shutdown(wait=True, cancel_futures=True)


def _run(job):
    fn, seed, tag, u, s, e, args = job
    return fn(stream(seed, tag, u), s, e, *args)
