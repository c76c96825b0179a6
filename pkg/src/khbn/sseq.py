"""Spectral sequence of a finite filtered F2 complex, and the u-adic
filtration of the cube complex.

Filtration is increasing, F_p = span of basis vectors with level <= p, and
the differential preserves every F_p (equivalently, never raises the level
of a basis vector).  Pages use the classical subquotients

    E_r^{p,i} = Z_r^{p,i} / (Z_{r-1}^{p-1,i} + d Z_{r-1}^{p+r-1,i-1}),
    Z_r^{p,i} = { x in F_p C^i : dx in F_{p-r} },

so d_r drops the filtration index by r.  For the u-adic filtration of the
k-truncated cube, level(g, u^p) = k-1-p: the u-free quotient sits on top
and the page-0 differential is the Khovanov one on each layer.

E_infty is the page at depth+1 (the filtration is bounded), and it must
match the graded pieces of the image filtration on homology; that
filtration is computed honestly from cycle spans: a torsion class can be
representable deeper in u than its tower position suggests, so the
associated graded is not a function of the module decomposition alone.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from .khcube import GradedComplex
from .homology import ModuleDecomp, _flatten_blocks
from .ringalg import Echelon, F2Mat, f2_rank

__all__ = [
    "FilteredComplex",
    "PageTable",
    "u_adic_filtration",
    "filtration_pages",
    "verify_einfty_gr",
    "FiltrationViolation",
]


class FiltrationViolation(AssertionError):
    pass


class FilteredComplex:
    """Finite F2 complex with a level per basis vector.

    d[i] maps degree i to i+1; quantum is an optional tag recording which
    quantum grading this complex was sliced from.
    """

    __slots__ = ("dims", "d", "levels", "quantum")

    def __init__(self, dims: Dict[int, int], d: Dict[int, F2Mat],
                 levels: Dict[int, List[int]], quantum: Optional[int] = None):
        self.dims = dict(dims)
        self.d = dict(d)
        self.levels = {i: list(v) for i, v in levels.items()}
        self.quantum = quantum
        for i, dim in self.dims.items():
            if len(self.levels.get(i, ())) != dim:
                raise FiltrationViolation(f"levels missing at degree {i}")
        for i, m in self.d.items():
            if m.cols != self.dims.get(i, 0) or m.rows != self.dims.get(i + 1, 0):
                raise FiltrationViolation(f"matrix shape mismatch at degree {i}")
            lv_in = self.levels.get(i, [])
            lv_out = self.levels.get(i + 1, [])
            for r in range(m.rows):
                for c in range(m.cols):
                    if m.get(r, c) and lv_out[r] > lv_in[c]:
                        raise FiltrationViolation(
                            f"d raises level at degree {i}: {lv_in[c]} -> {lv_out[r]}")

    def degrees(self) -> List[int]:
        return sorted(self.dims)

    def level_range(self) -> Tuple[int, int]:
        all_levels = [l for v in self.levels.values() for l in v]
        if not all_levels:
            return (0, 0)
        return min(all_levels), max(all_levels)

    def total_dim(self) -> int:
        return sum(self.dims.values())


class PageTable:
    """Dimensions of E_r at (filtration p, complementary q = i - p)."""

    __slots__ = ("pages", "r_stab", "depth", "quantum")

    def __init__(self, pages: List[Dict[Tuple[int, int], int]], r_stab: int,
                 depth: int, quantum: Optional[int] = None):
        self.pages = pages
        self.r_stab = r_stab
        self.depth = depth
        self.quantum = quantum

    def einfty(self) -> Dict[Tuple[int, int], int]:
        return self.pages[-1]

    def page_total(self, r: int) -> int:
        return sum(self.pages[r].values())

    def __repr__(self) -> str:
        return (f"PageTable(pages={len(self.pages)}, r_stab={self.r_stab},"
                f" E_inf total={self.page_total(len(self.pages) - 1)})")


def u_adic_filtration(C: GradedComplex) -> Dict[int, FilteredComplex]:
    """Slice the flattened cube complex by quantum grading; level k-1-p."""
    flat_basis, _, blocks = _flatten_blocks(C)
    js = sorted({j for i in flat_basis for j in flat_basis[i]})
    out: Dict[int, FilteredComplex] = {}
    for j in js:
        dims: Dict[int, int] = {}
        levels: Dict[int, List[int]] = {}
        d: Dict[int, F2Mat] = {}
        for i in sorted(flat_basis):
            basis = flat_basis[i].get(j)
            if basis is None:
                continue
            dims[i] = len(basis)
            levels[i] = [C.k - 1 - p for (_, p) in basis]
        for i in dims:
            m = blocks.get((i, j))
            if m is not None and (i + 1) in dims:
                d[i] = m
            elif m is not None and not m.is_zero():
                raise FiltrationViolation("differential leaves recorded support")
        out[j] = FilteredComplex(dims, d, levels, quantum=j)
    return out


def filtration_pages(F: FilteredComplex, r_max: Optional[int] = None) -> PageTable:
    """Pages E_0 .. E_{r_max}; default r_max = depth + 1, which is E_infty
    for a bounded filtration.  Stabilization is the first r whose page
    equals the next one."""
    lo, hi = F.level_range()
    depth = hi - lo
    if r_max is None:
        r_max = depth + 1
    zcache: Dict[Tuple[int, int, int], List[int]] = {}

    def subspace(i: int, p: int) -> List[int]:
        lv = F.levels.get(i, [])
        return [1 << c for c in range(len(lv)) if lv[c] <= p]

    def Z(r: int, p: int, i: int) -> List[int]:
        # basis of {x in F_p C^i : dx in F_{p-r}}; r = -1 means all of F_p
        if p < lo:
            return []
        if r < 0 or i not in F.dims:
            return subspace(i, p)
        key = (r, p, i)
        if key in zcache:
            return zcache[key]
        m = F.d.get(i)
        cols = [c for c in range(F.dims[i]) if F.levels[i][c] <= p]
        if m is None or not cols:
            res = [1 << c for c in cols]
            zcache[key] = res
            return res
        bad_rows = [rr for rr in range(m.rows)
                    if F.levels[i + 1][rr] > p - r]
        sub = F2Mat(len(bad_rows), len(cols))
        for new_r, rr in enumerate(bad_rows):
            for new_c, cc in enumerate(cols):
                if m.get(rr, cc):
                    sub.set(new_r, new_c, 1)
        kern = f2_rank(sub).kernel_basis
        res = []
        for v in kern:
            w = 0
            for b in _bits(v):
                w |= 1 << cols[b]
            res.append(w)
        zcache[key] = res
        return res

    pages: List[Dict[Tuple[int, int], int]] = []
    positions = sorted((i, p) for i in F.degrees()
                       for p in range(lo, hi + 1))
    for r in range(r_max + 1):
        page: Dict[Tuple[int, int], int] = {}
        for i, p in positions:
            znum = Z(r, p, i)
            if not znum:
                continue
            den = Echelon()
            for v in Z(r - 1, p - 1, i):
                den.add(v)
            m_prev = F.d.get(i - 1)
            if m_prev is not None:
                for x in Z(r - 1, p + r - 1, i - 1):
                    den.add(m_prev.apply(x))
            # the denominator sits inside Z_r, so the subquotient dimension
            # is a plain difference
            dim = len(znum) - den.dim
            if dim < 0:
                raise AssertionError("page denominator escaped its numerator")
            if dim:
                page[(p, i - p)] = dim
        pages.append(page)
    # pages are pointwise non-increasing, so matching the final page means
    # every intermediate page matches too; comparing merely consecutive
    # pages would stop early when d_0 vanishes but a later d_r does not
    r_stab = len(pages) - 1
    for r in range(len(pages)):
        if pages[r] == pages[-1]:
            r_stab = r
            break
    for r in range(len(pages) - 1):
        for key, dim in pages[r + 1].items():
            if dim > pages[r].get(key, 0):
                raise AssertionError(f"page dimensions grew at {key}, r={r + 1}")
    return PageTable(pages, r_stab, depth, quantum=F.quantum)


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


class GrReport:
    __slots__ = ("passed", "mismatches", "checked")

    def __init__(self, passed, mismatches, checked):
        self.passed = passed
        self.mismatches = mismatches
        self.checked = checked

    def __repr__(self):
        return (f"GrReport(passed={self.passed}, checked={self.checked},"
                f" mismatches={self.mismatches})")


def verify_einfty_gr(F: FilteredComplex, M: ModuleDecomp,
                     table: Optional[PageTable] = None) -> GrReport:
    """E_infty of F against the graded pieces of the image filtration on
    homology, position by position, plus the total per (i, quantum) against
    the module decomposition's F2 dimension."""
    if table is None:
        table = filtration_pages(F)
    einf = dict(table.einfty())
    lo, hi = F.level_range()
    mismatches = []
    checked = 0
    mdims = M.f2_dimensions()

    def cycles_in(i: int, p: int) -> List[int]:
        # kernel of d restricted to the coordinate subspace F_p, embedded
        # back into full coordinates; support filtering of a fixed kernel
        # basis would miss combinations that cancel high-level coordinates
        cols = [c for c in range(F.dims.get(i, 0)) if F.levels[i][c] <= p]
        m = F.d.get(i)
        if m is None or not cols:
            return [1 << c for c in cols]
        sub = F2Mat(m.rows, len(cols))
        for new_c, cc in enumerate(cols):
            for rr in range(m.rows):
                if m.get(rr, cc):
                    sub.set(rr, new_c, 1)
        out = []
        for v in f2_rank(sub).kernel_basis:
            w = 0
            for b in _bits(v):
                w |= 1 << cols[b]
            out.append(w)
        return out

    for i in F.degrees():
        m_in = F.d.get(i - 1)
        image = f2_rank(m_in).image_basis if m_in is not None else []
        im_ech = Echelon(image)
        im_dim = im_ech.dim
        prev = 0
        for p in range(lo, hi + 1):
            ech = Echelon(image)
            for z in cycles_in(i, p):
                ech.add(z)
            # dim F_p H = dim (cycles in F_p + image) / image
            dim_fp = ech.dim - im_dim
            gr = dim_fp - prev
            prev = dim_fp
            got = einf.pop((p, i - p), 0)
            checked += 1
            if gr != got:
                mismatches.append(((p, i - p), got, gr))
        if F.quantum is not None:
            total = prev
            want = mdims.get((i, F.quantum), 0)
            checked += 1
            if total != want:
                mismatches.append((("total", i, F.quantum), total, want))
    for key, dim in einf.items():
        if dim:
            mismatches.append((key, dim, 0))
    return GrReport(not mismatches, mismatches, checked)
