from itertools import product

import pytest
from hypothesis import given, strategies as st

from cofinal.errors import InvalidInput
from cofinal.lattice import (EMPTY, AnchoredPair, FinPoset, FinSet, canonicalize, dominates,
                             finset_from_json, is_a_extension, is_proper_subset, pair_le, subset_poset,
                             subsets)

labels = st.frozensets(st.integers(0, 7), max_size=6).map(FinSet)


def S(*xs):
    return FinSet(xs)


def test_canonicalize():
    assert canonicalize([3, 1, 3]) == S(1, 3)
    assert canonicalize([]) == EMPTY
    assert canonicalize([0, 1, 2]).sorted() == (0, 1, 2)


def test_finset_rejects_bad_labels():
    with pytest.raises(InvalidInput):
        FinSet([-1])
    with pytest.raises(InvalidInput):
        FinSet(["a"])


def test_json_requires_canonical_form():
    assert finset_from_json([1, 3]) == S(1, 3)
    with pytest.raises(InvalidInput, match="canonical"):
        finset_from_json([3, 1])
    with pytest.raises(InvalidInput):
        finset_from_json([1, 1])


def test_mask_roundtrip():
    x = S(0, 3, 9)
    assert FinSet.from_mask(x.mask) == x
    assert repr(x) == "{0,3,9}"


def test_set_operators_keep_type():
    assert isinstance(S(1) | S(2), FinSet)
    assert isinstance(S(1, 2) - S(2), FinSet)


def test_proper_subset():
    assert is_proper_subset(S(1), S(1, 2))
    assert not is_proper_subset(S(1), S(1))
    assert not is_proper_subset(S(1, 3), S(1, 2))


def test_a_extension():
    assert is_a_extension(S(1), S(1, 2), S(1, 3))
    assert not is_a_extension(S(1), S(1, 2), S(1, 2, 3))
    assert not is_a_extension(S(1), S(1, 2), S(1), proper=True)
    with pytest.raises(InvalidInput):
        is_a_extension(S(3), S(1, 2), S(1, 3))


def test_pair_le_examples():
    assert pair_le(AnchoredPair(S(1), S(1, 2)), AnchoredPair(S(1, 3), S(1, 2, 3)))
    assert not pair_le(AnchoredPair(S(1), S(1, 2)), AnchoredPair(S(1, 2), S(1, 2)))


def test_anchored_pair_validates():
    with pytest.raises(InvalidInput):
        AnchoredPair(S(3), S(1))


def _all_pairs(width):
    return [AnchoredPair(a, A) for A in subsets(range(width)) for a in subsets(A)]


@pytest.mark.parametrize("width", [1, 2, 3, 4])
def test_pair_le_is_a_preorder_exhaustively(width):
    ps = _all_pairs(width)
    up = {p: [q for q in ps if pair_le(p, q)] for p in ps}
    for p in ps:
        assert pair_le(p, p)
        for q in up[p]:
            for r in up[q]:
                assert pair_le(p, r)
            if pair_le(q, p):
                assert q == p


@given(labels, labels, labels, labels)
def test_extension_closed_under_outside_labels(a, A, b, s):
    A = A | a
    b = b | a
    s = s - A
    if is_a_extension(a, A, b):
        assert is_a_extension(a, A, b | s)


def test_subsets_order():
    out = [x.sorted() for x in subsets([0, 1, 2])]
    assert out == [(), (0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]
    assert len(list(subsets([0, 1, 2], proper=True))) == 7


def test_dominates_examples():
    rep = dominates([S(0, 1), S(2)], subsets([0, 1]))
    assert rep.cofinal
    # least witness in (size, elements) order: the empty set goes to {2}
    assert rep.witness_map == {EMPTY: S(2), S(0): S(0, 1), S(1): S(0, 1), S(0, 1): S(0, 1)}
    rep = dominates([S(0)], [S(1)])
    assert not rep.cofinal and rep.counterexample == S(1)
    assert dominates([], []).cofinal


@given(st.lists(labels, max_size=5), st.lists(labels, max_size=5), st.lists(labels, max_size=6))
def test_dominates_monotone(H, extra, targets):
    if dominates(H, targets).cofinal:
        assert dominates(H + extra, targets).cofinal


def test_poset_closure_and_cycles():
    P = FinPoset([0, 1, 2], [(0, 1), (1, 2)])
    assert P.lt(0, 2) and not P.lt(2, 0)
    assert P.maximal() == [2] and P.is_directed()
    with pytest.raises(InvalidInput):
        FinPoset([0, 1], [(0, 1), (1, 0)])
    with pytest.raises(InvalidInput):
        FinPoset([0, 1], [(0, 5)])


def test_poset_json_roundtrip():
    P = subset_poset([0, 1, 2])
    Q = FinPoset.from_json(P.to_json())
    assert P == Q
    # only covering pairs are written
    assert len(P.to_json()["lt"]) == 12


def test_antichain_not_directed():
    assert not FinPoset([0, 1], []).is_directed()


def test_subset_poset_relation_matches_inclusion():
    P = subset_poset([0, 1, 2])
    sets = list(subsets([0, 1, 2]))
    for (i, x), (j, y) in product(enumerate(sets), repeat=2):
        assert P.lt(i, j) == (x < y)
