import random

import pytest

from khbn.khcube import (BasepointMissing, Generator, MINUS, PLUS,
                         ResourceLimit, apply_edge_map, build_complex,
                         verify_d_squared)
from khbn.linkdiag import (Merge, Split, from_braid, load_link_table,
                           parse_pd, resolve)

TREFOIL = "PD[X(1,4,2,5), X(3,6,4,1), X(5,2,6,3)]"


def terms(kind, labeling, k, bystanders=None):
    return apply_edge_map(kind, labeling, k, bystanders or {})


def test_merge_table():
    m = Merge(1, 2, 1)
    for k in (2, 3):
        assert terms(m, {1: PLUS, 2: PLUS}, k) == [({1: PLUS}, type(
            terms(m, {1: PLUS, 2: PLUS}, k)[0][1]).one(k))]
        for la, lb in ((PLUS, MINUS), (MINUS, PLUS)):
            [(lab, c)] = terms(m, {1: la, 2: lb}, k)
            assert lab == {1: MINUS} and c.is_unit
        [(lab, c)] = terms(m, {1: MINUS, 2: MINUS}, k)
        assert lab == {1: MINUS}
        assert c.coeff(1) == 1 and not c.is_unit
    # at k=1 the u term is truncated away entirely
    assert terms(m, {1: MINUS, 2: MINUS}, 1) == []


def test_split_table():
    s = Split(1, 1, 2)
    [(lab, c)] = terms(s, {1: MINUS}, 2)
    assert lab == {1: MINUS, 2: MINUS} and c.is_unit
    got = terms(s, {1: PLUS}, 2)
    labs = sorted((tuple(sorted(l.items())), e.coeff(0), e.coeff(1))
                  for l, e in got)
    assert labs == [
        (((1, PLUS), (2, MINUS)), 1, 0),
        (((1, PLUS), (2, PLUS)), 0, 1),
        (((1, MINUS), (2, PLUS)), 1, 0),
    ] or len(got) == 3
    assert len(terms(s, {1: PLUS}, 1)) == 2


def test_bystanders_ride_along():
    m = Merge(1, 2, 1)
    [(lab, _)] = terms(m, {1: PLUS, 2: MINUS, 7: MINUS}, 2, {7: 9})
    assert lab == {1: MINUS, 9: MINUS}


def test_unknot_complexes():
    D = parse_pd("U")
    for k in (1, 2, 3):
        C = build_complex(D, k)
        assert C.degrees() == [0]
        assert C.rank(0) == 2
        assert C.d(0).is_zero()
        R = build_complex(D, k, reduced=True, basepoint=1)
        assert R.rank(0) == 1
        [g] = R.generators[0]
        assert R.bidegree(g) == (0, 1)
        assert R.bidegree(g, k - 1) == (0, 1 - 2 * (k - 1))


def test_trefoil_gradings_and_ranks():
    D = parse_pd(TREFOIL)
    C = build_complex(D, 2)
    assert C.degrees() == [-3, -2, -1, 0]
    # rank over the ring: sum over states of 2^(circle count)
    ranks = {i: C.rank(i) for i in C.degrees()}
    assert ranks == {-3: 8, -2: 12, -1: 6, 0: 4}
    g = Generator((0, 0, 0), (PLUS, PLUS, PLUS))
    i, j = C.bidegree(g)
    assert (i, j) == (-3, -3)
    assert C.bidegree(g, 1) == (-3, -5)
    R = build_complex(D, 2, reduced=True, basepoint=1)
    assert {i: R.rank(i) for i in R.degrees()} == {-3: 4, -2: 6, -1: 3, 0: 2}


def test_differential_is_quantum_homogeneous():
    D = from_braid([1, -2, 1, -2], 3)
    for k in (1, 2, 3):
        C = build_complex(D, k)
        for i in C.degrees():
            mat = C.d(i)
            for (h, g), e in mat.entries.items():
                src_j = C.bidegree(C.generators[i][g])[1]
                for b in range(k):
                    if e.coeff(b):
                        tgt = C.bidegree(C.generators[i + 1][h], b)
                        assert tgt == (i + 1, src_j)


def test_k1_is_k2_without_u():
    D = from_braid([1, 1, 1], 2)
    C1 = build_complex(D, 1)
    C2 = build_complex(D, 2)
    for i in C1.degrees():
        assert [g.sort_key() for g in C1.generators[i]] == \
               [g.sort_key() for g in C2.generators[i]]
        d1, d2 = C1.d(i), C2.d(i)
        keys = set(d1.entries) | set(d2.entries)
        for key in keys:
            assert d1.get(*key).coeff(0) == d2.get(*key).coeff(0)


def test_d_squared_random_braids():
    rng = random.Random(71)
    trials = 0
    while trials < 12:
        strands = rng.randrange(2, 4)
        word = [rng.choice([1, -1]) * rng.randrange(1, strands)
                for _ in range(rng.randrange(2, 6))]
        if set(abs(x) for x in word) != set(range(1, strands)):
            continue
        trials += 1
        D = from_braid(word, strands)
        for k in (1, 2, 3):
            for reduced in (False, True):
                C = build_complex(D, k, reduced=reduced,
                                  basepoint=D.arcs[0] if reduced else None)
                assert verify_d_squared(C).passed, (word, k, reduced)


def test_reduced_works_at_every_basepoint():
    D = parse_pd(TREFOIL)
    for arc in D.arcs:
        C = build_complex(D, 2, reduced=True, basepoint=arc)
        assert verify_d_squared(C).passed
        assert sum(C.rank(i) for i in C.degrees()) == 15


def test_reduced_rank_is_half():
    for name in ("figure8", "hopf_pos", "whitehead"):
        D = parse_pd(load_link_table()[name][0])
        full = build_complex(D, 2)
        half = build_complex(D, 2, reduced=True, basepoint=D.arcs[0])
        for i in full.degrees():
            assert full.rank(i) == 2 * half.rank(i)


def test_basepoint_must_be_an_arc():
    D = parse_pd(TREFOIL)
    with pytest.raises(BasepointMissing):
        build_complex(D, 2, reduced=True, basepoint=99)
    with pytest.raises(BasepointMissing):
        build_complex(D, 2, reduced=True)


def test_resource_guard():
    D = from_braid([1] * 15, 2)
    with pytest.raises(ResourceLimit):
        build_complex(D, 1)


def test_pointed_circle_tracked():
    D = parse_pd(TREFOIL)
    r = resolve(D, (0, 0, 0), 1)
    assert r.pointed_circle == r.circle_of(1)
    assert r.pointed_circle in r.circle_ids
