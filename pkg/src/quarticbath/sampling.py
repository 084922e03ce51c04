"""Deterministic random streams for ensemble construction.

Every sampled object (initial condition, dividing-surface point) gets its own
counter-based substream keyed by (seed, index). Draws for member i never
depend on how many draws member j consumed, so ensembles are reproducible
bit for bit under any partitioning of the index range across workers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream", "MASK64"]

MASK64 = (1 << 64) - 1


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for ensemble member `index` under `seed`.

    Philox is counter-based: distinct keys give statistically independent
    streams, so (seed, index) acts as a 128-bit stream id.
    """
    key = np.array([seed & MASK64, index & MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
