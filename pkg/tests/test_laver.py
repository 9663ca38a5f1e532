import pytest

from cofinal.errors import ConstraintConflict, InvalidInput
from cofinal.lattice import EMPTY, FinSet, set_key, subsets
from cofinal.laver import (constraint_conflicts, full_subset_registry, greedy_enumeration, laver_build,
                           laver_complete, laver_verify, registry_from_json, richness_violations,
                           state_from_json)


def S(*xs):
    return FinSet(xs)


@pytest.fixture(scope="module")
def small():
    return laver_build(4, {3: S(0)}, {3: (S(1, 2), [S(1), S(2)]), 2: (EMPTY, [])})


@pytest.fixture(scope="module")
def big():
    return laver_build(24, greedy_enumeration(24, range(24)), full_subset_registry(24, range(6)))


def test_hand_example(small):
    assert small.built[3] == S(0, 1, 2, 3)
    s3 = small.built[3]
    assert small.constraints == {(S(1), s3): 1, (S(2), s3): 2}
    log = small.choice_log[3]
    assert [(ch.beta, ch.ok) for ch in log] == [(3, True), (2, False), (1, False), (0, False)]


def test_hand_example_completion(small):
    F = laver_complete(small, 1)
    assert F.eval(S(1), S(0, 1, 2, 3)) == 1
    assert F.eval(S(2), S(0, 1, 2, 3)) == 2
    assert F.eval(EMPTY, S(0, 3)) == 1


def test_hand_example_witnesses(small):
    F = laver_complete(small, 1)
    (w,) = laver_verify(small, F, 3)
    assert (w.alpha, w.c, w.d, w.s, w.colors) == (3, S(1), S(2), S(0, 1, 2, 3), (1, 2))
    assert laver_verify(small, F, 2) == []
    with pytest.raises(InvalidInput):
        laver_verify(small, F, 1)


def test_empty_registry():
    st = laver_build(5, {}, {})
    assert st.built == {al: S(al) for al in range(5)} and st.constraints == {}
    st = laver_build(5, {3: S(0, 2)}, {})
    assert st.built[3] == S(0, 2, 3) and st.built[1] == S(1)


def test_default_color_and_conflicts(small):
    assert laver_complete(laver_build(3, {}, {}), 2).eval(S(0), S(0, 1)) == 2
    with pytest.raises(ConstraintConflict):
        laver_complete(small, 1, extra=[(S(1), S(0, 1, 2, 3), 2)])
    assert constraint_conflicts([(S(1), S(1, 2), 1), (S(1), S(1, 2), 1)]) == []


def test_registry_validation():
    with pytest.raises(InvalidInput):
        laver_build(4, {2: S(3)}, {})
    with pytest.raises(InvalidInput):
        laver_build(4, {}, {2: (S(0), [S(1)])})
    with pytest.raises(InvalidInput):
        laver_build(4, {}, {2: (S(2), [])})


def test_greedy_enumeration():
    en = greedy_enumeration(6, range(3))
    # least unused subset of {0,1,2} lying below each alpha
    assert en == {0: EMPTY, 1: S(0), 2: S(1), 3: S(2), 4: S(0, 1), 5: S(0, 2)}


def test_big_build_invariants(big):
    assert len(big.constraints) == 78
    for al, s in big.built.items():
        assert max(s) == al
        betas = [ch.beta for ch in big.choice_log[al]]
        assert betas == sorted(betas, reverse=True) and len(set(betas)) == len(betas)
        chosen = [x for ch in big.choice_log[al] if ch.ok for x in (ch.c, ch.d)]
        assert len(chosen) == len(set(chosen))
    assert richness_violations(big) == []
    rows = [(x, s, c) for (x, s), c in big.constraints.items()]
    assert constraint_conflicts(rows) == []


def test_big_build_witnesses(big):
    F = laver_complete(big, 1)
    total = 0
    for beta in big.mh_registry:
        for w in laver_verify(big, F, beta):
            assert w.c < w.s and w.d < w.s
            assert (F.eval(w.c, w.s), F.eval(w.d, w.s)) == (1, 2)
            total += 1
    assert total == 39


def test_samples_of_big_build(big):
    assert big.built[5] == S(4, 5)
    assert big.built[10] == S(0, 3, 9, 10)
    assert big.built[23] == S(0, 1, 2, 22, 23)


def test_state_json_roundtrip(small, big):
    for st in (small, big):
        assert state_from_json(st.to_json()) == st
    n, a, mh = registry_from_json(small.registry_json())
    assert n == 4 and a == {3: S(0)}
    broken = small.to_json()
    broken["built"][3][1] = [0, 3]
    with pytest.raises(InvalidInput, match="rebuild"):
        state_from_json(broken)


def test_full_registry_families():
    reg = full_subset_registry(8, range(3))
    for al, (M, H) in reg.items():
        assert not M or max(M) < al
        assert sorted(H, key=set_key) == list(subsets(M))
