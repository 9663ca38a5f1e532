import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from cofinal.coloring import PartialColoring, TableColoring, window_pairs
from cofinal.construction import Window, is_good_bounded
from cofinal.errors import CapExceeded, InvalidInput
from cofinal.lattice import FinPoset, subset_poset, subsets
from cofinal.oracle import (GeneratedPoset, anchored_pairs, char_width, char_width_trend, goodness_vector,
                            monotonicity_check, partial_colorings, search_cofinal_homogeneous,
                            sweep_colorings, table_digits, verify_search_result)

chain3 = FinPoset([0, 1, 2], [(0, 1), (1, 2)], {0: "a", 1: "b", 2: "c"})


def test_search_examples():
    assert search_cofinal_homogeneous(chain3, lambda x, y: 1) == ((2,), 1)
    col = {(0, 1): 1, (1, 2): 1, (0, 2): 2}.__getitem__
    H, c = search_cofinal_homogeneous(chain3, lambda x, y: col((x, y)), min_chain=2)
    assert (H, c) == ((1, 2), 1)
    assert all(verify_search_result(chain3, lambda x, y: col((x, y)), H, c, min_chain=2).values())
    assert search_cofinal_homogeneous(FinPoset([0, 1], []), lambda x, y: 1, min_chain=2) is None
    with pytest.raises(CapExceeded):
        search_cofinal_homogeneous(FinPoset(range(25), []), lambda x, y: 1)


def test_search_with_interior():
    # interior {a} is dominated by a alone
    assert search_cofinal_homogeneous(chain3, lambda x, y: 1, interior=[0]) == ((0,), 1)


def _naive_least(S, color, min_chain):
    n = len(S)
    best = None
    for mask in range(1 << n):
        H = [S.elements[i] for i in range(n) if mask >> i & 1]
        for c in (1, 2):
            if all(verify_search_result(S, color, H, c, min_chain=min_chain).values()):
                key = (len(H), c, H)
                best = key if best is None or key < best else best
    return best


@pytest.mark.parametrize("min_chain", [1, 2, 3])
def test_search_matches_naive_on_all_w2_colorings(min_chain):
    S = subset_poset(range(2))
    sets = list(subsets(range(2)))
    for index in range(32):
        F = TableColoring.from_index(2, 2, index)
        color = lambda x, y: F.eval(sets[x], sets[y])  # noqa: E731
        hit = search_cofinal_homogeneous(S, color, min_chain=min_chain)
        naive = _naive_least(S, color, min_chain)
        if naive is None:
            assert hit is None
        else:
            assert hit == (tuple(naive[2]), naive[1])
            assert all(verify_search_result(S, color, hit[0], hit[1], min_chain=min_chain).values())


def test_sweep_trivial_window():
    rep = sweep_colorings(1).to_json()
    assert rep["colorings"] == 2 and rep["pairs"] == 1
    assert rep["outcomes"]["least_H"] == {"size=1,color=1": 2}


def test_sweep_w2_goldens():
    rep = sweep_colorings(2).to_json()
    assert rep["colorings"] == 32
    assert rep["outcomes"] == {"least_H": {"size=1,color=1": 32},
                               "largest_H_size": {"2": 8, "3": 22, "4": 2}}
    rep = sweep_colorings(2, min_chain=2).to_json()
    assert rep["outcomes"]["least_H"] == {"size=2,color=1": 28, "size=2,color=2": 4}
    rep = sweep_colorings(2, min_chain=3).to_json()
    assert rep["outcomes"]["least_H"] == {"none": 18, "size=3,color=1": 7, "size=3,color=2": 7}
    assert sum(rep["outcomes"]["largest_H_size"].values()) == 32


def test_sweep_sampled_determinism_and_jobs():
    a = sweep_colorings(3, mode="sampled", samples=30, seed=11, min_chain=3)
    b = sweep_colorings(3, mode="sampled", samples=30, seed=11, min_chain=3, jobs=3)
    ja, jb = (json.dumps(r.to_json(), sort_keys=True) for r in (a, b))
    assert ja == jb
    rep = a.to_json()
    assert rep["seed"] == 11 and rep["generator"] == "python-random-MT19937"
    assert sum(rep["outcomes"]["least_H"].values()) == 30


def test_sweep_guards():
    with pytest.raises(CapExceeded):
        sweep_colorings(4)
    with pytest.raises(InvalidInput):
        sweep_colorings(2, mode="other")


def test_char_width_examples():
    r = char_width(subset_poset(range(2)), 0)
    assert r.subset == ("{0,1}",) and r.max_preds == 0 and r.passed
    fan = FinPoset(range(6), [(0, i) for i in range(1, 6)])
    r = char_width(fan, 0)
    assert r.subset == ("1", "2", "3", "4", "5") and r.max_preds == 0


def test_char_width_omega_sum_golden():
    r = char_width(GeneratedPoset("ORDINAL_SUM", 10), 3)
    assert r.subset == tuple(f"w{j}" for j in range(10))
    assert r.max_preds == 9 and not r.passed
    S, levels = GeneratedPoset("ORDINAL_SUM", 8).prefix()
    assert len(S) == 16
    assert char_width(S, 3, levels, exact=True).max_preds == 7
    rows = char_width_trend(GeneratedPoset("ORDINAL_SUM", 1), range(1, 9), 3, exact=True)
    assert [r["greedy"] for r in rows] == list(range(8))
    assert all(r["exact"] == r["greedy"] for r in rows)


def test_exact_limit():
    with pytest.raises(CapExceeded):
        char_width(FinPoset(range(17), []), 0, exact=True)


@st.composite
def small_posets(draw):
    n = draw(st.integers(1, 8))
    rel = [(i, j) for i in range(n) for j in range(i + 1, n) if draw(st.booleans())]
    return FinPoset(range(n), rel)


@settings(max_examples=60, deadline=None)
@given(small_posets())
def test_exact_never_worse_than_greedy(S):
    g = char_width(S, 0)
    e = char_width(S, 0, exact=True)
    assert e.max_preds <= g.max_preds
    for r in (g, e):
        members = [int(x) for x in r.subset]
        assert all(any(S.le(x, y) for y in members) for x in S.elements)


@pytest.mark.parametrize("gen", [
    GeneratedPoset("SUBSET_LATTICE", 3),
    GeneratedPoset("PRODUCT", 2, (GeneratedPoset("SUBSET_LATTICE", 2), GeneratedPoset("SUBSET_LATTICE", 2))),
])
def test_generated_levels_downward_closed(gen):
    S, levels = gen.prefix()
    for L in levels:
        for i in range(len(S)):
            if L >> i & 1:
                assert S.down_mask(i) & ~L == 0


def test_generated_poset_json():
    g = GeneratedPoset("PRODUCT", 2, (GeneratedPoset("ORDINAL_SUM", 2), GeneratedPoset("SUBSET_LATTICE", 2)))
    assert GeneratedPoset.from_json(g.to_json()) == g
    with pytest.raises(InvalidInput):
        GeneratedPoset("NOPE", 2)
    with pytest.raises(InvalidInput):
        GeneratedPoset("PRODUCT", 2)


def test_goodness_vector_agrees_with_scalar():
    rng = random.Random(3)
    digits = table_digits(3)
    rows = [rng.randrange(len(digits)) for _ in range(25)]
    win = Window(3, 1)
    for p in anchored_pairs(3):
        for f in list(partial_colorings(p.part, 2))[:12]:
            v = goodness_vector(digits[rows], 3, 1, p, f)
            for t, i in enumerate(rows):
                assert bool(v[t]) == is_good_bounded(TableColoring.from_index(3, 2, i), p, f, win).good


def test_table_digits_match_from_index():
    digits = table_digits(2)
    pairs = window_pairs(2)
    for i in (0, 7, 31):
        F = TableColoring.from_index(2, 2, i)
        assert list(digits[i]) == [F.eval_mask(*p) for p in pairs]


def test_monotonicity_small_window():
    rep = monotonicity_check(2, 1)
    assert rep.colorings == 32 and rep.mode == "exhaustive"
    assert rep.violations == [] and rep.implications > 0


def test_partial_coloring_count():
    # each of the 2 subsets of a singleton: absent or one of 2 colors
    assert len(list(partial_colorings(PartialColoring([0]).base, 2))) == 9
