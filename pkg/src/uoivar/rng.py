"""Deterministic random-stream derivation.

Every stochastic routine takes an explicit numpy Generator. Replicate-level
streams are derived from (seed, purpose tag, replicate index) so that results
do not depend on execution order or worker count.
"""

from __future__ import annotations

import numpy as np

# Purpose tags. Values are part of the reproducibility contract: changing
# them changes every seeded result.
TAG_SIMULATE = 1
TAG_SYSTEM = 2
TAG_INTERSECT = 3
TAG_INTERSECT_RETRY = 4
TAG_UNION_TRAIN = 5
TAG_UNION_TEST = 6
TAG_REALIZATION = 7
TAG_COMPARATOR = 8


def child_stream(seed: int, purpose: int, index: int) -> np.random.Generator:
    """Generator derived from (seed, purpose, index), independent across keys."""
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(purpose, index))
    return np.random.default_rng(ss)


def derive_seed(seed: int, purpose: int, index: int) -> int:
    """64-bit child seed for handing to a nested seeded component."""
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(purpose, index))
    state = ss.generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])
