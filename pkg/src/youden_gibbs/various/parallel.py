"""
Ordered parallel map over independent replicates

Every task derives its own random stream from (seed, index), so results do
not depend on the number of workers.
"""
from __future__ import annotations

import logging
from typing import Callable, Iterable, List

import numpy as np
from joblib import Parallel, delayed

logger = logging.getLogger(__name__)


def task_rng(seed: int, *index: int) -> np.random.Generator:
    """Independent generator for replicate `index` of a run seeded with `seed`"""
    return np.random.default_rng([int(seed), *(int(i) for i in index)])


def parallel_map(func: Callable, items: Iterable, threads: int = 1) -> List:
    """
    [func(item) for item in items], in order, on up to `threads` worker processes.
    func must be a module-level function (picklable).
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.debug("dispatching %d tasks to %d workers", len(items), threads)
    return Parallel(n_jobs=threads)(delayed(func)(item) for item in items)
