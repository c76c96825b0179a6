"""Pure-Python GF(2) row reduction on bit-packed rows.

Fallback for the compiled core in _f2core; both expose the same rref()
and must return identical output (RREF of a row space is unique).
"""

from __future__ import annotations

from typing import List, Tuple

__all__ = ["rref"]


def rref(rows: List[int], cols: int) -> Tuple[List[int], List[int]]:
    """Reduced row echelon form.

    Rows are ints with bit c = entry in column c.  Pivot rule: leftmost
    pivot column first, lowest-index available row.  Returns the nonzero
    RREF rows (in pivot order) and the pivot column list.
    """
    work = list(rows)
    n = len(work)
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        if r == n:
            break
        bit = 1 << c
        pr = -1
        for i in range(r, n):
            if work[i] & bit:
                pr = i
                break
        if pr < 0:
            continue
        work[r], work[pr] = work[pr], work[r]
        prow = work[r]
        for i in range(n):
            if i != r and work[i] & bit:
                work[i] ^= prow
        pivots.append(c)
        r += 1
    return work[:r], pivots
