"""
Seeded replication engine.

Replication i always draws from its own RandomStream, so results are the
same whether tasks run in one process or spread over a Pool.
"""

import logging
import multiprocessing
from typing import Callable, List, Optional, Sequence

import numpy as np

from trulr.exceptions import InvalidParameterError, ReplicationError
from trulr.models.streams import RandomStream

logger = logging.getLogger(__name__)

USE_MULTIPROCESSING = True
NUM_WORKERS = multiprocessing.cpu_count()


def _run_indexed(indexed_task):
    """Runs task(stream) for one index and tags failures with that index."""
    index, task, stream = indexed_task
    try:
        return task(stream)
    except ReplicationError:
        raise
    except Exception as e:
        raise ReplicationError(index, e) from e


def resolve_workers(threads: Optional[int]) -> int:
    """Worker count; None means one per CPU."""
    if threads is None:
        return NUM_WORKERS if USE_MULTIPROCESSING else 1
    if threads < 1:
        raise InvalidParameterError(f"threads must be >= 1, got {threads}")
    return min(threads, NUM_WORKERS)


def run_tasks(
    tasks: Sequence[Callable],
    streams: Sequence[RandomStream],
    threads: Optional[int] = 1,
) -> List:
    """[tasks[i](streams[i]) for each i], possibly in parallel, in order."""
    if len(tasks) != len(streams):
        raise InvalidParameterError("need one stream per task")
    params = [(i, task, stream) for i, (task, stream) in enumerate(zip(tasks, streams))]
    workers = resolve_workers(threads)
    if workers > 1 and len(params) > 1:
        chunksize = max(1, len(params) // (workers * 4))
        with multiprocessing.Pool(workers) as pool:
            return pool.map(_run_indexed, params, chunksize=chunksize)
    return list(map(_run_indexed, params))


_installed_task = None


def _install_task(task):
    global _installed_task
    _installed_task = task


def _run_installed(indexed_stream):
    index, stream = indexed_stream
    return _run_indexed((index, _installed_task, stream))


def run_streams(
    task: Callable, streams: Sequence[RandomStream], threads: Optional[int] = 1
) -> List:
    """[task(s) for s in streams], in order.

    The task is shipped to each worker once (Pool initializer), not per stream.
    """
    params = list(enumerate(streams))
    workers = resolve_workers(threads)
    if workers > 1 and len(params) > 1:
        chunksize = max(1, len(params) // (workers * 4))
        with multiprocessing.Pool(
            workers, initializer=_install_task, initargs=(task,)
        ) as pool:
            return pool.map(_run_installed, params, chunksize=chunksize)
    return [_run_indexed((i, task, stream)) for i, stream in params]


def replicate(
    task: Callable, reps: int, seed: int, threads: Optional[int] = 1
) -> np.ndarray:
    """result[i] = task(RandomStream(seed, i))."""
    if reps < 1:
        raise InvalidParameterError(f"reps must be >= 1, got {reps}")
    streams = [RandomStream(seed, i) for i in range(reps)]
    logger.debug("replicating %d tasks with seed %d", reps, seed)
    return np.asarray(run_streams(task, streams, threads))


def chunk_sizes(total: int, chunk: int) -> List[int]:
    """Split total into pieces of at most chunk (the last one may be smaller)."""
    if total < 0 or chunk < 1:
        raise InvalidParameterError("need total >= 0 and chunk >= 1")
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])
