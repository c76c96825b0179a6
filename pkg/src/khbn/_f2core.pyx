# cython: boundscheck=False, wraparound=False, cdivision=True
"""Bit-packed GF(2) row reduction.

Same contract as khbn._f2pure.rref: rows are Python ints (bit c = column c);
returns the nonzero reduced-echelon rows in pivot order plus their pivot
columns.  Reduced echelon form is unique per row space, so this kernel and
the pure one agree bit for bit.
"""

from libc.stdlib cimport calloc, free
from libc.stdint cimport uint64_t


def rref(rows, long cols):
    cdef long nrows = len(rows)
    if nrows == 0 or cols == 0:
        return [], []
    cdef long words = (cols + 63) >> 6
    cdef uint64_t *buf = <uint64_t *> calloc(nrows * words, sizeof(uint64_t))
    if buf == NULL:
        raise MemoryError()
    cdef long i, w, r, col, piv, j
    cdef uint64_t mask = <uint64_t> 0xFFFFFFFFFFFFFFFF
    cdef object row
    try:
        for i in range(nrows):
            row = rows[i]
            for w in range(words):
                buf[i * words + w] = <uint64_t> ((row >> (64 * w)) & 0xFFFFFFFFFFFFFFFF)
        pivots = []
        r = 0
        for col in range(cols):
            if r == nrows:
                break
            w = col >> 6
            mask = (<uint64_t> 1) << (col & 63)
            piv = -1
            for i in range(r, nrows):
                if buf[i * words + w] & mask:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != r:
                for j in range(words):
                    buf[piv * words + j], buf[r * words + j] = \
                        buf[r * words + j], buf[piv * words + j]
            for i in range(nrows):
                if i != r and (buf[i * words + w] & mask):
                    for j in range(words):
                        buf[i * words + j] ^= buf[r * words + j]
            pivots.append(col)
            r += 1
        out = []
        for i in range(r):
            row = 0
            for w in range(words):
                if buf[i * words + w]:
                    row |= <object> int(buf[i * words + w]) << (64 * w)
            out.append(row)
        return out, pivots
    finally:
        free(buf)
