"""Seeded uniform streams on top of numpy's Philox4x64 counter generator.

Row ``r`` of a stream of width ``d`` always consumes the Philox counters
``r * ceil(d / 4)`` onwards, so any block of rows can be produced on its own
and the result does not depend on how rows are split between workers.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _philox(seed: int, counter: int) -> np.random.Philox:
    seed = int(seed) & _MASK64
    return np.random.Philox(key=seed, counter=counter)


def uniform_rows(seed: int, stop: int, width: int, start: int = 0) -> np.ndarray:
    """Rows ``start:stop`` of the uniform stream of ``seed``; values in (0, 1)."""
    blocks = -(-width // 4)
    n = stop - start
    if n <= 0:
        return np.empty((0, width))
    gen = _philox(seed, start * blocks)
    raw = gen.random_raw(4 * blocks * n).reshape(n, 4 * blocks)[:, :width]
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
