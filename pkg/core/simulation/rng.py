#!/usr/bin/env python3
"""
Random Streams
==============

Counter-based random streams keyed by (seed, purpose, block). Replica i
always lives in block i // REPLICAS_PER_BLOCK, so the numbers it sees do
not depend on how replicas are spread over workers.
"""

import hashlib
from typing import Iterator, Tuple

import numpy as np

from config.settings import Config

# purposes keep streams used for different things apart
PURPOSE_EVENTS = 0
PURPOSE_MARKS = 1
PURPOSE_AUXILIARY = 2
PURPOSE_GAUSSIAN = 3
PURPOSE_STATIONARY = 4


def _seed_value(seed: int) -> int:
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seeds must be nonnegative, got {seed}")
    return seed


def block_stream(seed: int, block: int, purpose: int = PURPOSE_EVENTS) -> np.random.Generator:
    """Philox generator for one block of replicas"""
    sequence = np.random.SeedSequence(_seed_value(seed), spawn_key=(int(purpose), int(block)))
    return np.random.Generator(np.random.Philox(sequence))


def replica_stream(seed: int, replica: int, purpose: int = PURPOSE_EVENTS) -> np.random.Generator:
    """Generator dedicated to a single replica (used by single-path simulations)"""
    sequence = np.random.SeedSequence(_seed_value(seed), spawn_key=(int(purpose), 1 << 32, int(replica)))
    return np.random.Generator(np.random.Philox(sequence))


def replica_blocks(n_replicas: int, block_size: int = None) -> Iterator[Tuple[int, int, int]]:
    """Yield (block, start, stop) covering range(n_replicas)"""
    block_size = int(block_size or Config.REPLICAS_PER_BLOCK)
    for block, start in enumerate(range(0, int(n_replicas), block_size)):
        yield block, start, min(start + block_size, int(n_replicas))


def derive_seed(run_seed: int, scenario_id: str) -> int:
    """Scenario seed: first 8 bytes of blake2b('<run_seed>:<scenario_id>'), big endian"""
    digest = hashlib.blake2b(f"{int(run_seed)}:{scenario_id}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, 'big')
