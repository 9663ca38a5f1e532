"""Brute-force searches and sweeps over small windows and generated posets.

The arrow relation is trivial on a finite directed poset (its maximum is a
cofinal homogeneous set), so the searches here are parametrized: H must
dominate a chosen ``interior`` and contain a chain of length ``min_chain``.
Results are reported as search outcomes under those knobs, never as
statements about the infinite case.
"""
from __future__ import annotations

import random
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable, Sequence

import numpy as np

from .coloring import PartialColoring, window_pairs
from .errors import CapExceeded, InvalidInput
from .lattice import AnchoredPair, FinPoset, FinSet, subsets

SWEEP_SCHEMA = "cofinal.sweep/1"
GENERATOR_NAME = "python-random-MT19937"
SEMANTICS = ("finite truncation: H must dominate the interior, be homogeneous on comparable pairs "
             "and contain a chain of length >= min_chain; outcomes are search results, not theorem checks")


def _upeq_masks(S: FinPoset) -> list:
    n = len(S)
    up = [1 << i for i in range(n)]
    for j in range(n):
        d = S.down_mask(j)
        for i in range(n):
            if d >> i & 1:
                up[i] |= 1 << j
    return up


def _longest_chain(mask: int, down: Sequence[int]) -> int:
    idx = [i for i in range(len(down)) if mask >> i & 1]
    idx.sort(key=lambda i: (down[i] & mask).bit_count())
    best = {}
    for i in idx:
        below = [best[j] for j in best if down[i] >> j & 1]
        best[i] = 1 + max(below, default=0)
    return max(best.values(), default=0)


class _Searcher:
    """Per-poset tables shared by every coloring in a sweep."""

    def __init__(self, S: FinPoset, interior=None):
        n = len(S)
        self.n = n
        self.S = S
        self.down = [S.down_mask(i) for i in range(n)]
        self.up = _upeq_masks(S)
        if interior is None:
            ipos = range(n)
        else:
            ipos = [S.index(e) for e in interior]
        # dominating the maximal interior points is enough
        self.targets = [i for i in ipos if not any(j != i and self.up[i] >> j & 1 for j in ipos)]
        self.pairs = [(i, j) for j in range(n) for i in range(n) if self.down[j] >> i & 1]

    def check(self, mask: int, colors: dict, min_chain: int):
        """(valid, color) for candidate H given as a position mask."""
        for t in self.targets:
            if not mask & self.up[t]:
                return False, None
        color = None
        for i, j in self.pairs:
            if mask >> i & 1 and mask >> j & 1:
                c = colors[(i, j)]
                if color is None:
                    color = c
                elif c != color:
                    return False, None
        if min_chain > 1 and _longest_chain(mask, self.down) < min_chain:
            return False, None
        return True, 1 if color is None else color

    def least(self, colors: dict, min_chain: int):
        for size in range(self.n + 1):
            found = []
            for combo in combinations(range(self.n), size):
                mask = sum(1 << i for i in combo)
                ok, color = self.check(mask, colors, min_chain)
                if ok:
                    found.append((color, combo))
            if found:
                color, combo = min(found)
                return combo, color
        return None

    def largest(self, colors: dict, min_chain: int) -> int:
        for size in range(self.n, -1, -1):
            for combo in combinations(range(self.n), size):
                if self.check(sum(1 << i for i in combo), colors, min_chain)[0]:
                    return size
        return None


def search_cofinal_homogeneous(S: FinPoset, color: Callable, interior: Iterable | None = None,
                               min_chain: int = 1, limit: int = 24):
    """Least H (by size, then color, then element order) meeting the three knobs, or None.

    ``color(x, y)`` gives the color of a comparable pair x < y of element ids.
    """
    if len(S) > limit:
        raise CapExceeded(f"poset has {len(S)} elements, search limit is {limit}")
    srch = _Searcher(S, interior)
    colors = {(i, j): color(S.elements[i], S.elements[j]) for i, j in srch.pairs}
    hit = srch.least(colors, min_chain)
    if hit is None:
        return None
    combo, c = hit
    return tuple(S.elements[i] for i in combo), c


def verify_search_result(S: FinPoset, color: Callable, H, c: int, interior=None, min_chain: int = 1) -> dict:
    """Re-check the three clauses of a search result from scratch."""
    H = list(H)
    interior = list(S.elements if interior is None else interior)
    dom = all(any(S.le(x, y) for y in H) for x in interior)
    comp = [(x, y) for x in H for y in H if S.lt(x, y)]
    hom = all(color(x, y) == c for x, y in comp)
    # longest chain by brute recursion
    def longest(x):
        return 1 + max((longest(y) for y in H if S.lt(x, y)), default=0)
    chain = max((longest(x) for x in H), default=0)
    return {"dominates": dom, "homogeneous": hom, "chain": chain >= min_chain}


def _sweep_chunk(args):
    width, k, indices, interior, min_chain, digits = args
    from .lattice import subset_poset
    S = subset_poset(range(width))
    srch = _Searcher(S, interior)
    sets = list(subsets(range(width)))
    pair_index = {p: n for n, p in enumerate(window_pairs(width))}
    slots = {(i, j): pair_index[(sets[i].mask, sets[j].mask)] for i, j in srch.pairs}
    least, largest = Counter(), Counter()
    for row in (digits if digits is not None else indices):
        if digits is None:
            row = [(row // k ** n) % k for n in range(len(pair_index))]
        colors = {ij: row[n] + 1 for ij, n in slots.items()}
        hit = srch.least(colors, min_chain)
        key = "none" if hit is None else f"size={len(hit[0])},color={hit[1]}"
        least[key] += 1
        top = srch.largest(colors, min_chain)
        largest["none" if top is None else str(top)] += 1
    return least, largest


@dataclass
class SweepReport:
    width: int
    k: int
    mode: str
    colorings: int
    least: dict
    largest: dict
    knobs: dict
    seed: int | None = None
    pairs: int = 0

    def to_json(self):
        out = {
            "schema": SWEEP_SCHEMA,
            "window": self.width,
            "k": self.k,
            "pairs": self.pairs,
            "mode": self.mode,
            "colorings": self.colorings,
            "knobs": self.knobs,
            "semantics": SEMANTICS,
            "outcomes": {"least_H": self.least, "largest_H_size": self.largest},
        }
        if self.mode == "sampled":
            out["seed"] = self.seed
            out["generator"] = GENERATOR_NAME
        return out


def sweep_colorings(width: int, k: int = 2, mode: str = "exhaustive", samples: int = 1000,
                    seed: int = 0, interior=None, min_chain: int = 1, jobs: int = 1,
                    max_colorings: int = 2 ** 20) -> SweepReport:
    """Run the cofinal-homogeneous search on every (or a sample of) table coloring of P({0..w-1})."""
    if width < 1:
        raise InvalidInput("window width must be >= 1")
    npairs = len(window_pairs(width))
    total = k ** npairs
    if mode == "exhaustive":
        if total > max_colorings:
            raise CapExceeded(f"{k}^{npairs} colorings exceed the exhaustive limit {max_colorings}; use sampled mode")
        work, digits = list(range(total)), None
    elif mode == "sampled":
        rng = random.Random(seed)
        digits = [[rng.randrange(k) for _ in range(npairs)] for _ in range(samples)]
        work = digits
    else:
        raise InvalidInput(f"unknown sweep mode {mode!r}")
    if interior is not None:
        sets = list(subsets(range(width)))
        interior = [sets.index(FinSet(x)) for x in interior]
    jobs = max(1, jobs)
    size = max(1, -(-len(work) // jobs))
    chunks = [work[i:i + size] for i in range(0, len(work), size)]
    args = [(width, k, None if digits is not None else ch, interior, min_chain,
             ch if digits is not None else None) for ch in chunks]
    if jobs == 1 or len(chunks) == 1:
        results = [_sweep_chunk(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_sweep_chunk, args))
    least, largest = Counter(), Counter()
    for l, g in results:
        least.update(l)
        largest.update(g)
    knobs = {"interior": "all" if interior is None else [list(subsets(range(width)))[i].to_json() for i in interior],
             "min_chain": min_chain}
    by_size = sorted(largest.items(), key=lambda kv: (kv[0] != "none", int(kv[0]) if kv[0] != "none" else 0))
    return SweepReport(width, k, mode, len(work), dict(sorted(least.items())), dict(by_size), knobs,
                       seed if mode == "sampled" else None, npairs)


# --- generated posets and finite character -------------------------------------------------

GENERATORS = ("SUBSET_LATTICE", "ORDINAL_SUM", "PRODUCT")


@dataclass(frozen=True)
class GeneratedPoset:
    generator: str
    depth: int
    factors: tuple = ()

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise InvalidInput(f"unknown generator {self.generator!r}")
        if self.depth < 1:
            raise InvalidInput("depth must be >= 1")
        if (self.generator == "PRODUCT") != bool(self.factors):
            raise InvalidInput("PRODUCT needs exactly two factors; other generators take none")
        if self.generator == "PRODUCT" and len(self.factors) != 2:
            raise InvalidInput("PRODUCT needs exactly two factors")

    def at(self, depth: int) -> "GeneratedPoset":
        return GeneratedPoset(self.generator, depth, tuple(f.at(depth) for f in self.factors))

    def names(self) -> list:
        t = self.depth
        if self.generator == "SUBSET_LATTICE":
            return [repr(s) for s in subsets(range(t))]
        if self.generator == "ORDINAL_SUM":
            return [str(i) for i in range(t)] + [f"w{j}" for j in range(t)]
        a, b = (f.names() for f in self.factors)
        return [f"({u}|{v})" for u in a for v in b]

    def _lt(self):
        t = self.depth
        if self.generator == "SUBSET_LATTICE":
            sets = {repr(s): s for s in subsets(range(t))}
            return lambda u, v: sets[u] < sets[v]
        if self.generator == "ORDINAL_SUM":
            def key(u):
                return (1, int(u[1:])) if u.startswith("w") else (0, int(u))
            return lambda u, v: key(u) < key(v)
        fa, fb = self.factors
        la, lb = fa._lt(), fb._lt()
        split = {f"({u}|{v})": (u, v) for u in fa.names() for v in fb.names()}

        def lt(x, y):
            (u, v), (u2, v2) = split[x], split[y]
            return (u == u2 or la(u, u2)) and (v == v2 or lb(v, v2)) and x != y
        return lt

    def prefix(self, limit: int = 2 ** 14):
        """(FinPoset of the depth-t prefix, level masks for depths 1..t)."""
        names = self.names()
        if len(names) > limit:
            raise CapExceeded(f"prefix has {len(names)} elements, limit is {limit}")
        lt = self._lt()
        pos = {u: i for i, u in enumerate(names)}
        rel = [(pos[u], pos[v]) for u in names for v in names if lt(u, v)]
        S = FinPoset(range(len(names)), rel, dict(enumerate(names)))
        levels = []
        for d in range(1, self.depth + 1):
            levels.append(sum(1 << pos[u] for u in self.at(d).names()))
        return S, levels

    def to_json(self):
        out = {"generator": self.generator, "depth": self.depth}
        if self.factors:
            out["factors"] = [f.to_json() for f in self.factors]
        return out

    @classmethod
    def from_json(cls, obj, path="poset"):
        if not isinstance(obj, dict) or "generator" not in obj:
            raise InvalidInput("generated poset needs a 'generator' field", path)
        depth = obj.get("depth")
        if isinstance(depth, bool) or not isinstance(depth, int):
            raise InvalidInput("depth must be an integer", f"{path}.depth")
        factors = tuple(cls.from_json(f, f"{path}.factors[{i}]") for i, f in enumerate(obj.get("factors", [])))
        return cls(obj["generator"], depth, factors)


@dataclass(frozen=True)
class CharWidthResult:
    subset: tuple
    max_preds: int
    passed: bool
    mode: str

    def to_json(self):
        return {"S_prime": list(self.subset), "max_preds": self.max_preds, "pass": self.passed, "mode": self.mode}


def _max_preds(mask: int, down: Sequence[int]) -> int:
    return max(((down[i] & mask).bit_count() for i in range(len(down)) if mask >> i & 1), default=0)


def _level_tops(levels, down, up, n):
    tops = []
    for L in levels:
        tops.append([i for i in range(n) if L >> i & 1 and not (up[i] & L & ~(1 << i))])
    return tops


def char_width(S, bound: int, levels: Sequence[int] | None = None, exact: bool = False,
               exact_limit: int = 16) -> CharWidthResult:
    """Find a cofinal S' and report the largest number of predecessors inside S'.

    ``S`` is a FinPoset or a GeneratedPoset. For a generated poset S' must be
    cofinal in every level prefix using members of that level, a finite
    stand-in for cofinality in the limit.
    """
    if isinstance(S, GeneratedPoset):
        S, levels = S.prefix()
    n = len(S)
    if n > 2 ** 14:
        raise CapExceeded(f"poset has {n} elements, limit is {2 ** 14}")
    levels = list(levels) if levels else [(1 << n) - 1]
    down = [S.down_mask(i) for i in range(n)]
    up = _upeq_masks(S)
    tops = _level_tops(levels, down, up, n)
    if not exact:
        chosen = 0
        for L, ts in zip(levels, tops):
            for i in ts:
                if not chosen & L & up[i]:
                    chosen |= 1 << i
        best = chosen
    else:
        if n > exact_limit:
            raise CapExceeded(f"exact mode handles at most {exact_limit} elements, got {n}")
        best, best_key = None, None
        for mask in range(1 << n):
            if all(mask & L & up[i] for L, ts in zip(levels, tops) for i in ts):
                key = (_max_preds(mask, down), mask.bit_count(), [i for i in range(n) if mask >> i & 1])
                if best_key is None or key < best_key:
                    best, best_key = mask, key
    mp = _max_preds(best, down)
    names = tuple(S.name(S.elements[i]) for i in range(n) if best >> i & 1)
    return CharWidthResult(names, mp, mp <= bound, "exact" if exact else "greedy")


def char_width_trend(gen: GeneratedPoset, depths: Iterable[int], bound: int, exact: bool = False) -> list:
    rows = []
    for d in depths:
        g = gen.at(d)
        row = {"depth": d, "greedy": char_width(g, bound).max_preds}
        if exact:
            S, levels = g.prefix()
            row["exact"] = char_width(S, bound, levels, exact=True).max_preds if len(S) <= 16 else None
        row["size"] = len(g.names())
        rows.append(row)
    return rows


# --- goodness over every table coloring of a window --------------------------------------

def table_digits(width: int, k: int = 2, sample: int | None = None, seed: int = 0) -> np.ndarray:
    """Matrix of colorings (rows) by window pairs (columns), colors 1..k.

    Exhaustive when ``sample`` is None: row i is the base-k expansion of i,
    matching :meth:`TableColoring.from_index`.
    """
    P = len(window_pairs(width))
    if sample is None:
        total = k ** P
        idx = np.arange(total, dtype=np.int64)
        cols = [((idx // k ** n) % k + 1).astype(np.uint8) for n in range(P)]
        return np.stack(cols, axis=1)
    rng = random.Random(seed)
    return np.array([[rng.randrange(k) + 1 for _ in range(P)] for _ in range(sample)], dtype=np.uint8)


def goodness_vector(digits: np.ndarray, width: int, reserve: int, p: AnchoredPair, f: PartialColoring) -> np.ndarray:
    """is-good verdicts of (p, f) for every coloring row, by full quantification with FinSets."""
    W = FinSet(range(width))
    col = {pair: n for n, pair in enumerate(window_pairs(width))}
    cache = {}

    def correct(c: FinSet) -> np.ndarray:
        hit = cache.get(c)
        if hit is None:
            hit = np.ones(len(digits), dtype=bool)
            for x, color in f.items():
                hit &= digits[:, col[(x.mask, c.mask)]] == color
            cache[c] = hit
        return hit

    out = np.ones(len(digits), dtype=bool)
    for extra in subsets(W - p.ground):
        B = p.ground | extra
        free = W - B
        if len(free) < reserve:
            continue
        for add in subsets(extra):
            b = p.part | add
            any_ok = np.zeros(len(digits), dtype=bool)
            for s in subsets(free):
                if s:
                    any_ok |= correct(b | s)
            out &= any_ok
    return out


def anchored_pairs(width: int) -> list:
    W = list(range(width))
    return [AnchoredPair(a, A) for A in subsets(W) for a in subsets(A)]


def partial_colorings(base: FinSet, k: int):
    """Every partial coloring of ``base`` (each subset absent or one of k colors)."""
    dom = list(subsets(base))
    for choice in np.ndindex(*([k + 1] * len(dom))):
        yield PartialColoring(base, {x: c for x, c in zip(dom, choice) if c})


@dataclass
class MonotonicityReport:
    width: int
    reserve: int
    k: int
    colorings: int
    mode: str
    anchors: int = 0
    vacuous_anchors: int = 0
    pairs_pf: int = 0
    implications: int = 0
    violations: list = field(default_factory=list)

    def to_json(self):
        return {k: v for k, v in self.__dict__.items() if k != "violations"} | {
            "violations": len(self.violations)}


def monotonicity_check(width: int, reserve: int, k: int = 2, max_colorings: int = 2 ** 20,
                       sample: int = 10 ** 4, seed: int = 0) -> MonotonicityReport:
    """Check good(p, f) => good(p', f') for f' inside f and p' above p, over all table colorings.

    Anchors whose ground leaves fewer than ``reserve`` labels free are good
    for everything, as is every anchor above them; those implications hold
    without computation and are only counted.
    """
    P = len(window_pairs(width))
    exhaustive = k ** P <= max_colorings
    digits = table_digits(width, k, None if exhaustive else sample, seed)
    rep = MonotonicityReport(width, reserve, k, len(digits), "exhaustive" if exhaustive else "sampled")
    anchors = anchored_pairs(width)
    rep.anchors = len(anchors)
    live = [p for p in anchors if width - len(p.ground) >= reserve]
    rep.vacuous_anchors = len(anchors) - len(live)
    verdicts = {}

    def good(p, f):
        key = (p, f)
        if key not in verdicts:
            verdicts[key] = goodness_vector(digits, width, reserve, p, f)
        return verdicts[key]

    for p in live:
        above = [q for q in live if p.ground <= q.ground and (q.part & p.ground) == p.part]
        for f in partial_colorings(p.part, k):
            rep.pairs_pf += 1
            g = good(p, f)
            if not g.any():
                continue
            for f2 in f.submaps():
                for q in above:
                    rep.implications += 1
                    bad = g & ~good(q, f2)
                    if bad.any():
                        rep.violations.append((int(np.argmax(bad)), p, f, q, f2))
    return rep
