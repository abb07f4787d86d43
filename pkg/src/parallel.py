"""
Replicate execution backends

Bootstrap replicates and random-walk replicates are independent; this
module runs them either serially or on a thread pool.  Results always
come back in replicate-index order so reductions are reproducible
regardless of the backend or the number of workers.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Callable, List, TypeVar, Union

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar("T")


class ExecutionMode(Enum):
    """Available replicate execution backends"""
    SERIAL = "serial"
    THREADS = "threads"


def select_mode(workers: int) -> ExecutionMode:
    return ExecutionMode.SERIAL if workers <= 1 else ExecutionMode.THREADS


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent random stream for one replicate, derived from (seed, index)"""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def run_replicates(
    func: Callable[[int], T],
    count: int,
    workers: int = 1,
    mode: Union[ExecutionMode, str, None] = None,
) -> List[T]:
    """
    Evaluate func(0) .. func(count - 1)

    Args:
        func: Replicate function taking the replicate index
        count: Number of replicates
        workers: Thread count for the THREADS backend
        mode: Backend; chosen from workers when omitted

    Returns:
        Results ordered by replicate index
    """
    if isinstance(mode, str):
        try:
            mode = ExecutionMode(mode.lower())
        except ValueError:
            raise ValueError(f"Unknown execution mode: {mode}")
    if mode is None:
        mode = select_mode(workers)

    if mode == ExecutionMode.SERIAL or count <= 1:
        return [func(i) for i in range(count)]

    logger.debug(f"Running {count} replicates on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, range(count)))
