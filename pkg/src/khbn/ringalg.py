"""Exact arithmetic in F2[u]/u^k and sparse/bit-packed linear algebra over F2.

Homology over the truncated polynomial ring is reduced to plain GF(2)
elimination: matrices over F2[u]/u^k are flattened to F2 (k x k
lower-triangular Toeplitz block per entry), and module structure is
recovered from the induced nilpotent u-action via rank counts.
"""

from __future__ import annotations

import os
from typing import Dict, Iterable, List, Sequence, Tuple

__all__ = [
    "KERNEL",
    "RingElem",
    "SparseMat",
    "F2Mat",
    "RankResult",
    "f2_rank",
    "flatten",
    "nilpotent_block_multiplicities",
    "Echelon",
    "NotNilpotentAtOrderK",
    "DimensionMismatch",
]

if os.environ.get("KHBN_FORCE_PURE_KERNEL"):
    from . import _f2pure as _kernel

    KERNEL = "pure (forced)"
else:
    try:
        from . import _f2core as _kernel  # type: ignore[attr-defined]

        KERNEL = "compiled"
    except ImportError:
        from . import _f2pure as _kernel

        KERNEL = "pure"


class DimensionMismatch(ValueError):
    pass


class NotNilpotentAtOrderK(ValueError):
    pass


class RingElem:
    """Element of F2[u]/u^k; bit b of `bits` is the coefficient of u^b."""

    __slots__ = ("k", "bits")

    def __init__(self, k: int, bits: int = 0):
        if k < 1:
            raise ValueError("truncation order k must be >= 1")
        self.k = k
        self.bits = bits & ((1 << k) - 1)

    @staticmethod
    def one(k: int) -> "RingElem":
        return RingElem(k, 1)

    @staticmethod
    def u_power(k: int, p: int) -> "RingElem":
        return RingElem(k, 1 << p if 0 <= p < k else 0)

    def __add__(self, other: "RingElem") -> "RingElem":
        if self.k != other.k:
            raise DimensionMismatch("mixed truncation orders")
        return RingElem(self.k, self.bits ^ other.bits)

    def __mul__(self, other: "RingElem") -> "RingElem":
        if self.k != other.k:
            raise DimensionMismatch("mixed truncation orders")
        a, b, acc = self.bits, other.bits, 0
        while a:
            lsb = a & -a
            acc ^= b << (lsb.bit_length() - 1)
            a ^= lsb
        return RingElem(self.k, acc)

    def coeff(self, p: int) -> int:
        return (self.bits >> p) & 1 if 0 <= p < self.k else 0

    @property
    def is_unit(self) -> bool:
        return bool(self.bits & 1)

    def __bool__(self) -> bool:
        return bool(self.bits)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RingElem) and (self.k, self.bits) == (other.k, other.bits)

    def __hash__(self) -> int:
        return hash((self.k, self.bits))

    def __repr__(self) -> str:
        if not self.bits:
            return "0"
        terms = []
        for p in range(self.k):
            if (self.bits >> p) & 1:
                terms.append("1" if p == 0 else ("u" if p == 1 else f"u^{p}"))
        return "+".join(terms)


class SparseMat:
    """Sparse rows x cols matrix over F2[u]/u^k; absent entries are zero."""

    __slots__ = ("rows", "cols", "k", "entries")

    def __init__(self, rows: int, cols: int, k: int,
                 entries: Dict[Tuple[int, int], RingElem] | None = None):
        self.rows = rows
        self.cols = cols
        self.k = k
        self.entries: Dict[Tuple[int, int], RingElem] = {}
        if entries:
            for (r, c), e in entries.items():
                self.add_to(r, c, e)

    def add_to(self, r: int, c: int, e: RingElem) -> None:
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise DimensionMismatch(f"entry ({r},{c}) outside {self.rows}x{self.cols}")
        cur = self.entries.get((r, c))
        new = cur + e if cur is not None else e
        if new:
            self.entries[(r, c)] = new
        elif cur is not None:
            del self.entries[(r, c)]

    def get(self, r: int, c: int) -> RingElem:
        return self.entries.get((r, c), RingElem(self.k))

    def mul(self, other: "SparseMat") -> "SparseMat":
        if self.cols != other.rows or self.k != other.k:
            raise DimensionMismatch("incompatible product")
        by_row: Dict[int, List[Tuple[int, RingElem]]] = {}
        for (r, c), e in other.entries.items():
            by_row.setdefault(r, []).append((c, e))
        out = SparseMat(self.rows, other.cols, self.k)
        for (r, c), e in self.entries.items():
            for c2, e2 in by_row.get(c, ()):
                out.add_to(r, c2, e * e2)
        return out

    def is_zero(self) -> bool:
        return not self.entries

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, SparseMat)
                and (self.rows, self.cols, self.k) == (other.rows, other.cols, other.k)
                and self.entries == other.entries)

    def __repr__(self) -> str:
        return f"SparseMat({self.rows}x{self.cols}, k={self.k}, nnz={len(self.entries)})"


class F2Mat:
    """Dense bit-packed matrix over F2; row r is an int with bit c per column."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: Sequence[int] | None = None):
        self.rows = rows
        self.cols = cols
        if data is None:
            self.data = [0] * rows
        else:
            if len(data) != rows:
                raise DimensionMismatch("row count mismatch")
            mask = (1 << cols) - 1
            self.data = [x & mask for x in data]

    @staticmethod
    def identity(n: int) -> "F2Mat":
        return F2Mat(n, n, [1 << i for i in range(n)])

    def set(self, r: int, c: int, v: int) -> None:
        if v & 1:
            self.data[r] |= 1 << c
        else:
            self.data[r] &= ~(1 << c)

    def get(self, r: int, c: int) -> int:
        return (self.data[r] >> c) & 1

    def column(self, c: int) -> int:
        """Column c as an int with bit r per row."""
        out = 0
        bit = 1 << c
        for r, row in enumerate(self.data):
            if row & bit:
                out |= 1 << r
        return out

    def mul(self, other: "F2Mat") -> "F2Mat":
        if self.cols != other.rows:
            raise DimensionMismatch("incompatible product")
        out = []
        orows = other.data
        for a in self.data:
            acc = 0
            x = a
            while x:
                lsb = x & -x
                acc ^= orows[lsb.bit_length() - 1]
                x ^= lsb
            out.append(acc)
        return F2Mat(self.rows, other.cols, out)

    def apply(self, v: int) -> int:
        """Matrix times column vector (bit r of result = row r dot v)."""
        out = 0
        for r, row in enumerate(self.data):
            if (row & v).bit_count() & 1:
                out |= 1 << r
        return out

    def transpose(self) -> "F2Mat":
        out = [0] * self.cols
        for r, row in enumerate(self.data):
            x = row
            while x:
                lsb = x & -x
                out[lsb.bit_length() - 1] |= 1 << r
                x ^= lsb
        return F2Mat(self.cols, self.rows, out)

    def is_zero(self) -> bool:
        return not any(self.data)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, F2Mat)
                and (self.rows, self.cols) == (other.rows, other.cols)
                and self.data == other.data)

    def __repr__(self) -> str:
        return f"F2Mat({self.rows}x{self.cols})"


class RankResult:
    __slots__ = ("rank", "kernel_basis", "image_basis", "rref", "pivots")

    def __init__(self, rank: int, kernel_basis: List[int], image_basis: List[int],
                 rref: "F2Mat", pivots: List[int]):
        self.rank = rank
        self.kernel_basis = kernel_basis
        self.image_basis = image_basis
        self.rref = rref
        self.pivots = pivots


def f2_rank(M: F2Mat) -> RankResult:
    """Rank, kernel basis, image basis and RREF of M, deterministically.

    Kernel vectors live in the column space (bit c per column); image
    vectors are the original pivot columns (bit r per row).
    """
    rr, pivots = _kernel.rref(M.data, M.cols)
    rank = len(pivots)
    pivot_set = set(pivots)
    piv_row = {c: rr[i] for i, c in enumerate(pivots)}
    kernel: List[int] = []
    for c in range(M.cols):
        if c in pivot_set:
            continue
        v = 1 << c
        bit = 1 << c
        for p in pivots:
            if piv_row[p] & bit:
                v |= 1 << p
        kernel.append(v)
    image = [M.column(c) for c in pivots]
    # rank-nullity, asserted on every call
    assert rank + len(kernel) == M.cols
    return RankResult(rank, kernel, image, F2Mat(rank, M.cols, rr), pivots)


def flatten(M: SparseMat) -> F2Mat:
    """Expand each F2[u]/u^k entry to its k x k multiplication operator.

    Basis convention: flattened index n*k + p is (generator n, u^p); the
    entry u^b contributes 1s at block positions (p+b, p).  Functorial:
    flatten(A.mul(B)) == flatten(A).mul(flatten(B)).
    """
    k = M.k
    out = F2Mat(M.rows * k, M.cols * k)
    for (r, c), e in M.entries.items():
        bits = e.bits
        b = 0
        while bits:
            if bits & 1:
                for p in range(k - b):
                    out.data[r * k + p + b] |= 1 << (c * k + p)
            bits >>= 1
            b += 1
    return out


def nilpotent_block_multiplicities(N: F2Mat, k: int) -> Dict[int, int]:
    """Jordan-block multiplicities of a nilpotent operator with N^k = 0.

    Returns {j: m_j} for j = 1..k where m_j counts cyclic summands
    F2[u]/u^j, via m_j = rank(N^(j-1)) - 2 rank(N^j) + rank(N^(j+1)).
    """
    if N.rows != N.cols:
        raise DimensionMismatch("nilpotent operator must be square")
    d = N.rows
    ranks = [d]
    P = F2Mat.identity(d)
    for _ in range(k + 1):
        P = N.mul(P)
        ranks.append(f2_rank(P).rank)
    if ranks[k] != 0:
        raise NotNilpotentAtOrderK(f"N^{k} has rank {ranks[k]}")
    out: Dict[int, int] = {}
    for j in range(1, k + 1):
        m = ranks[j - 1] - 2 * ranks[j] + ranks[j + 1]
        if m < 0:
            raise AssertionError("negative block multiplicity")
        out[j] = m
    if sum(j * m for j, m in out.items()) != d:
        raise AssertionError("block multiplicities do not reconstruct the dimension")
    return out


class Echelon:
    """Incremental GF(2) echelon basis keyed by lowest set bit."""

    __slots__ = ("pivots",)

    def __init__(self, vectors: Iterable[int] = ()):
        self.pivots: Dict[int, int] = {}
        for v in vectors:
            self.add(v)

    def reduce(self, v: int) -> int:
        piv = self.pivots
        while v:
            p = (v & -v).bit_length() - 1
            row = piv.get(p)
            if row is None:
                return v
            v ^= row
        return 0

    def add(self, v: int) -> int:
        """Reduce v; if independent, insert and return the reduced vector."""
        v = self.reduce(v)
        if v:
            self.pivots[(v & -v).bit_length() - 1] = v
        return v

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0

    @property
    def dim(self) -> int:
        return len(self.pivots)
