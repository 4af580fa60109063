"""Counter-based Gaussian field used for projection matrices.

Entry (i, j) of the standard-normal field is a pure function of
(key, i, j): row i occupies a fixed range of Philox counter blocks, so any
row range or column panel can be regenerated independently and the result
is identical no matter how the work is partitioned.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Philox, SeedSequence
from scipy.special import ndtri

_TO_UNIT = 2.0 ** -53  # top 53 bits of a u64 word -> (0, 1)
_HALF_ULP = 2.0 ** -54


def philox_key(seed: int, *stream: int) -> np.ndarray:
    """Derive a 128-bit Philox key from a master seed and a stream path."""
    return SeedSequence(seed, spawn_key=stream).generate_state(2, np.uint64)


def generator(seed: int, *stream: int) -> np.random.Generator:
    """Sequential generator for distribution-level sampling (graph synthesis)."""
    return np.random.Generator(Philox(key=philox_key(seed, *stream)))


def _blocks_per_row(q: int) -> int:
    return (q + 3) // 4


def normal_rows(key: np.ndarray, row_start: int, row_stop: int, q: int) -> np.ndarray:
    """Rows [row_start, row_stop) of the N(0,1) field, shape (rows, q)."""
    rows = row_stop - row_start
    if rows <= 0:
        return np.empty((0, q))
    bpr = _blocks_per_row(q)
    raw = Philox(counter=[row_start * bpr, 0, 0, 0], key=key).random_raw(4 * bpr * rows)
    words = raw.reshape(rows, 4 * bpr)[:, :q]
    return ndtri((words >> np.uint64(11)) * _TO_UNIT + _HALF_ULP)


def normal_panel(key: np.ndarray, row_start: int, row_stop: int, q: int,
                 col_start: int, col_stop: int) -> np.ndarray:
    """Columns [col_start, col_stop) of the same field, one counter jump per row."""
    rows = row_stop - row_start
    cols = col_stop - col_start
    bpr = _blocks_per_row(q)
    b0, b1 = col_start // 4, (col_stop + 3) // 4
    out = np.empty((rows, cols))
    for r in range(rows):
        counter = [(row_start + r) * bpr + b0, 0, 0, 0]
        raw = Philox(counter=counter, key=key).random_raw(4 * (b1 - b0))
        words = raw[col_start - 4 * b0:col_start - 4 * b0 + cols]
        out[r] = ndtri((words >> np.uint64(11)) * _TO_UNIT + _HALF_ULP)
    return out
