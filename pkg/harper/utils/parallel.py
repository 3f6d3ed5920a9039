import logging
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np
from joblib import Parallel, delayed

from harper.config import settings
from harper.exceptions import DomainError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(func: Callable[[T], R], items: Iterable[T], n_jobs: Optional[int] = None) -> List[R]:
    """Ordered map over items, fanned out to HARPER_THREADS workers"""
    items = list(items)
    n_jobs = settings.threads if n_jobs is None else n_jobs
    if n_jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.debug(f"dispatching {len(items)} tasks to {n_jobs} workers")
    return Parallel(n_jobs=n_jobs)(delayed(func)(item) for item in items)


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise DomainError(f"seed must be a nonnegative integer, got {seed!r}")
    return int(seed)


def substream(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for (seed, index), independent of scheduling"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([check_seed(seed), int(index)])))
