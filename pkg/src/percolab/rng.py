"""Counter-based random streams.

All randomness in the package flows from one 64-bit seed.  Stream ``i`` is the
Philox4x64 generator with key ``(seed, i)``; replicate ``i`` of a batch uses
stream ``i``, and vectorized batch chunks use the stream of their first
replicate index.  Philox streams with distinct keys are independent, so the
scheme is splittable without coordination and deterministic regardless of
worker scheduling.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed, index):
    """Generator for the (seed, index) stream."""
    key = np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


_GOLDEN = 0x9E3779B97F4A7C15


def subseed(seed, task_index):
    """Derived seed for task ``task_index`` of a run (golden-ratio increment).

    Keeps the batches of distinct sub-tasks (different p values, bootstrap
    stages, ...) on disjoint Philox key ranges while remaining a pure function
    of the run seed.
    """
    return (seed + task_index * _GOLDEN) & _MASK64
