"""
Deterministic sharding of sampling work.

Shard ``k`` always draws from substream ``k`` of the master seed and results
are merged in shard order, so output depends on the shard count only, never
on how many workers ran the shards.
"""
import asyncio
from typing import Callable, List, TypeVar

import numpy as np
import structlog

logger = structlog.get_logger(__name__)

T = TypeVar("T")


def generator(seed: int) -> np.random.Generator:
    """PCG64 generator for a 64-bit seed"""
    return np.random.default_rng(np.random.SeedSequence(seed))


def substreams(seed: int, n: int) -> List[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def shard_sizes(total: int, n_shards: int) -> List[int]:
    """Split ``total`` into ``n_shards`` near-equal parts, larger parts first"""
    base, extra = divmod(total, n_shards)
    return [base + (1 if k < extra else 0) for k in range(n_shards)]


def run_shards(
    fn: Callable[[int, np.random.Generator], T],
    seed: int,
    n_shards: int = 1,
    workers: int = 1,
) -> List[T]:
    """
    Run ``fn(shard_index, rng)`` for every shard and return results in shard order.

    Args:
        fn: Shard body; must only draw randomness from the rng it is given
        seed: Master seed
        n_shards: Number of substreams
        workers: Threads used to run shards concurrently
    """
    rngs = substreams(seed, n_shards)
    if workers <= 1 or n_shards == 1 or _loop_running():
        return [fn(k, rng) for k, rng in enumerate(rngs)]

    logger.debug("[PARALLEL] running shards", n_shards=n_shards, workers=workers)
    return asyncio.run(_gather(fn, rngs, workers))


async def _gather(fn, rngs, workers):
    semaphore = asyncio.Semaphore(workers)

    async def one(k):
        async with semaphore:
            # Use asyncio.to_thread since the shard body is synchronous
            return await asyncio.to_thread(fn, k, rngs[k])

    return list(await asyncio.gather(*(one(k) for k in range(len(rngs)))))


def _loop_running() -> bool:
    try:
        asyncio.get_running_loop()
    except RuntimeError:
        return False
    return True
