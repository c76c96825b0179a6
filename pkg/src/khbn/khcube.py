"""The cube of resolutions and its chain complex over F2[u]/u^k.

Circles of each resolution carry v_plus or v_minus; the edge maps are

    merge: (v+,v+) -> v+   (v+,v-) -> v-   (v-,v+) -> v-   (v-,v-) -> u v-
    split: v+ -> v+ v- + v- v+ + u v+ v+   v- -> v- v-

At k=1 the u terms die and this is the Khovanov complex.  Gradings:
i = |state| - n_minus and j = (#plus - #minus) - 2 u_power + |state|
+ n_plus - 2 n_minus, so u has bidegree (0,-2) in (i,j) order.

The reduced complex is the quotient killing every generator whose pointed
circle carries v_minus; that span is a subcomplex, which the builder
asserts rather than assumes.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from .linkdiag import Diagram, Merge, Split, EdgeTransition, edge_transition, resolve
from .ringalg import RingElem, SparseMat

__all__ = [
    "Generator",
    "GradedComplex",
    "apply_edge_map",
    "build_complex",
    "verify_d_squared",
    "BasepointMissing",
    "SubcomplexViolation",
    "ResourceLimit",
]

MINUS = 1
PLUS = 0


class BasepointMissing(ValueError):
    pass


class SubcomplexViolation(AssertionError):
    pass


class ResourceLimit(RuntimeError):
    pass


class Generator:
    """One free-module basis element: a state plus a per-circle label.

    labels[n] is the label of the n-th circle of the resolution at `state`
    (circles ordered by canonical id); 1 means v_minus.
    """

    __slots__ = ("state", "labels")

    def __init__(self, state: Sequence[int], labels: Sequence[int]):
        self.state = tuple(state)
        self.labels = tuple(labels)

    def sort_key(self):
        return (self.state, self.labels)

    def __eq__(self, other):
        return (isinstance(other, Generator) and self.state == other.state
                and self.labels == other.labels)

    def __hash__(self):
        return hash((self.state, self.labels))

    def __repr__(self):
        lab = "".join("-" if b else "+" for b in self.labels)
        return f"Gen({''.join(map(str, self.state))}|{lab})"


class GradedComplex:
    """Chain complex of free F2[u]/u^k modules indexed by homological degree."""

    __slots__ = ("D", "k", "reduced", "basepoint", "generators", "differential",
                 "index", "circle_ids")

    def __init__(self, D, k, reduced, basepoint, generators, differential,
                 circle_ids):
        self.D = D
        self.k = k
        self.reduced = reduced
        self.basepoint = basepoint
        self.generators: Dict[int, List[Generator]] = generators
        self.differential: Dict[int, SparseMat] = differential
        self.circle_ids: Dict[Tuple[int, ...], Tuple[int, ...]] = circle_ids
        self.index: Dict[int, Dict[Generator, int]] = {
            i: {g: n for n, g in enumerate(gens)}
            for i, gens in generators.items()}

    def degrees(self) -> List[int]:
        return sorted(self.generators)

    def bidegree(self, g: Generator, u_power: int = 0) -> Tuple[int, int]:
        D = self.D
        w = sum(g.state)
        i = w - D.n_minus
        minus = sum(g.labels)
        plus = len(g.labels) - minus
        j = (plus - minus) - 2 * u_power + w + D.n_plus - 2 * D.n_minus
        return i, j

    def rank(self, i: int) -> int:
        return len(self.generators.get(i, ()))

    def d(self, i: int) -> SparseMat:
        return self.differential.get(
            i, SparseMat(self.rank(i + 1), self.rank(i), self.k))


def apply_edge_map(kind, labeling: Dict[int, int], k: int,
                   bystander_map: Dict[int, int]) -> List[Tuple[Dict[int, int], RingElem]]:
    """TQFT edge map on one labeling (circle id -> 0/1, 1 for v_minus).

    Returns the formal sum as (labeling, coefficient) pairs; zero
    coefficients are dropped (u^k = 0 truncation happens in RingElem).
    """
    base = {bystander_map[c]: v for c, v in labeling.items() if c in bystander_map}
    one = RingElem.one(k)
    u = RingElem.u_power(k, 1)
    out: List[Tuple[Dict[int, int], RingElem]] = []
    if isinstance(kind, Merge):
        la, lb = labeling[kind.src_a], labeling[kind.src_b]
        coeff = u if (la, lb) == (MINUS, MINUS) else one
        lab = dict(base)
        lab[kind.dst] = MINUS if (la or lb) else PLUS
        if coeff:
            out.append((lab, coeff))
    elif isinstance(kind, Split):
        src = labeling[kind.src]
        if src == MINUS:
            lab = dict(base)
            lab[kind.dst_a] = MINUS
            lab[kind.dst_b] = MINUS
            out.append((lab, one))
        else:
            for va, vb, coeff in ((PLUS, MINUS, one), (MINUS, PLUS, one),
                                  (PLUS, PLUS, u)):
                if not coeff:
                    continue
                lab = dict(base)
                lab[kind.dst_a] = va
                lab[kind.dst_b] = vb
                out.append((lab, coeff))
    else:
        raise TypeError(f"unclassified edge kind: {kind!r}")
    return out


def build_complex(D: Diagram, k: int, reduced: bool = False,
                  basepoint: Optional[int] = None,
                  force: bool = False) -> GradedComplex:
    """Assemble the full complex; asserts d*d = 0 before returning.

    Above 14 crossings the cube is refused unless force is set.
    """
    if k < 1:
        raise ValueError("truncation order k must be >= 1")
    if D.n > 14 and not force:
        raise ResourceLimit(
            f"{D.n} crossings: the full cube has {1 << D.n} vertices;"
            " pass force to proceed")
    bp = basepoint if basepoint is not None else D.basepoint_arc
    if reduced and bp is None:
        raise BasepointMissing("reduced complex needs a basepoint arc")
    if bp is not None and bp not in D.arcs:
        raise BasepointMissing(f"arc {bp} does not occur in the diagram")
    n = D.n
    states = [tuple((bits >> c) & 1 for c in range(n)) for bits in range(1 << n)]
    circle_ids: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
    pointed: Dict[Tuple[int, ...], Optional[int]] = {}
    for s in states:
        r = resolve(D, s, bp)
        circle_ids[s] = r.circle_ids
        pointed[s] = r.pointed_circle

    def keep(state, labels) -> bool:
        if not reduced:
            return True
        pc = pointed[state]
        return labels[circle_ids[state].index(pc)] == PLUS

    generators: Dict[int, List[Generator]] = {}
    for s in states:
        i = sum(s) - D.n_minus
        c = len(circle_ids[s])
        bucket = generators.setdefault(i, [])
        for bits in range(1 << c):
            labels = tuple((bits >> t) & 1 for t in range(c))
            if keep(s, labels):
                bucket.append(Generator(s, labels))
    for i in generators:
        generators[i].sort(key=Generator.sort_key)
    index = {i: {g: t for t, g in enumerate(gens)}
             for i, gens in generators.items()}

    transitions: Dict[Tuple[Tuple[int, ...], int], EdgeTransition] = {}
    for s in states:
        for c in range(n):
            if s[c] == 0:
                transitions[(s, c)] = edge_transition(D, s, c)

    differential: Dict[int, SparseMat] = {}
    degs = sorted(generators)
    for i in degs:
        nxt = generators.get(i + 1, [])
        mat = SparseMat(len(nxt), len(generators[i]), k)
        tgt_index = index.get(i + 1, {})
        for col, g in enumerate(generators[i]):
            ids = circle_ids[g.state]
            labeling = dict(zip(ids, g.labels))
            for c in range(n):
                if g.state[c] != 0:
                    continue
                t = transitions[(g.state, c)]
                to_ids = circle_ids[t.to_state]
                for lab, coeff in apply_edge_map(t.kind, labeling, k,
                                                 t.bystander_map):
                    labels = tuple(lab[cid] for cid in to_ids)
                    if reduced and not keep(t.to_state, labels):
                        # quotient projection: terms hitting killed
                        # generators vanish
                        continue
                    h = Generator(t.to_state, labels)
                    row = tgt_index.get(h)
                    if row is None:
                        raise SubcomplexViolation(
                            f"edge image {h!r} missing from degree {i + 1}")
                    mat.add_to(row, col, coeff)
        differential[i] = mat

    C = GradedComplex(D, k, reduced, bp, generators, differential, circle_ids)
    report = verify_d_squared(C)
    if not report.passed:
        raise SubcomplexViolation(f"d squared nonzero: {report.failures}")
    if reduced:
        _assert_quotient_legal(D, k, bp, circle_ids, pointed, transitions)
    return C


def _assert_quotient_legal(D, k, bp, circle_ids, pointed, transitions):
    """The v_minus-at-basepoint span must be a subcomplex, else the quotient
    above is not a complex.  Checked structurally: every edge map out of a
    killed labeling stays killed."""
    for (state, c), t in transitions.items():
        ids = circle_ids[state]
        pc = pointed[state]
        kind = t.kind
        involved = ({kind.src_a, kind.src_b} if isinstance(kind, Merge)
                    else {kind.src})
        if pc not in involved:
            continue
        labeling = {cid: (MINUS if cid == pc else PLUS) for cid in ids}
        for lab, _ in apply_edge_map(kind, labeling, k, t.bystander_map):
            if lab[pointed[t.to_state]] != MINUS:
                raise SubcomplexViolation(
                    f"killed generator leaks at state {state}, crossing {c}")


class DSquaredReport:
    __slots__ = ("passed", "failures")

    def __init__(self, passed, failures):
        self.passed = passed
        self.failures = failures

    def __repr__(self):
        return f"DSquaredReport(passed={self.passed}, failures={self.failures})"


def verify_d_squared(C: GradedComplex) -> DSquaredReport:
    """Check every consecutive product d_{i+1} d_i = 0; reports offenders
    by (degree, first nonzero bidegree)."""
    failures = []
    for i in C.degrees():
        if i + 1 not in C.differential:
            continue
        prod = C.d(i + 1).mul(C.d(i))
        if not prod.is_zero():
            (r, c), _ = next(iter(sorted(prod.entries.items())))
            g = C.generators[i][c]
            failures.append((i, C.bidegree(g)))
    return DSquaredReport(not failures, failures)
