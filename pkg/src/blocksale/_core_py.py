"""Pure-numpy fallback for the Bellman row fill.

Vectorizes over budgets n for each candidate decision k; scanning k in
ascending order with strict improvement reproduces the compiled kernel's
smallest-k tie-breaking exactly.
"""

from __future__ import annotations

import numpy as np


def fill_row(prev, prev_lo, cur, cur_lo, parents, w, k_lo, k_hi):
    width = len(cur)
    prev_len = len(prev)
    n = cur_lo + np.arange(width)
    best = np.full(width, -np.inf)
    best_k = np.full(width, -1, dtype=np.int32)
    for k in range(k_lo, k_hi + 1):
        j = n - k - prev_lo
        valid = (j >= 0) & (j < prev_len)
        if not valid.any():
            continue
        cand = np.where(valid, prev[np.clip(j, 0, prev_len - 1)] + w * k, -np.inf)
        improved = cand > best
        best[improved] = cand[improved]
        best_k[improved] = k
    cur[:] = best
    parents[:] = best_k
