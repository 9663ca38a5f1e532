"""Bounded goodness checks, the two lemma searches, and approximations.

All quantifiers range over a finite label window {0..w-1}. A quantified
pair (b, B) must leave at least ``reserve`` labels of the window outside B,
standing in for the room a countable set always leaves inside omega_1.

Goodness is decided on bitmasks. Let U be the window labels outside the
anchor's ground set. Every candidate extension is ``part | Z`` for some
Z inside U, so f-correctness is tabulated once per Z and each quantified
pair becomes a table lookup.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb

from .coloring import (PairColoring, PartialColoring, TotalColoring, derive_f_H_a,
                       enumerate_total_colorings, induced_total_coloring)
from .errors import (CapExceeded, ConstructionStuck, InvalidInput, WindowExhausted,
                     WitnessDisagreement)
from .lattice import AnchoredPair, FinSet, dominates, finset_from_json, pair_le, set_key, subsets
from .ramsey import extract_end_homogeneous, extract_homogeneous

DEFAULT_PAIR_CAP = 10 ** 6
SCHEMA = "cofinal.approximation/1"


@dataclass(frozen=True)
class Window:
    width: int
    reserve: int = 1

    def __post_init__(self):
        if self.width < 1:
            raise InvalidInput(f"window width must be >= 1, got {self.width}")
        if not 1 <= self.reserve < self.width:
            raise InvalidInput(f"reserve must satisfy 1 <= r < w, got r={self.reserve}, w={self.width}")

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1

    @property
    def labels(self) -> FinSet:
        return FinSet(range(self.width))

    def to_json(self):
        return {"width": self.width, "reserve": self.reserve}


def quantified_pair_count(outside: int, reserve: int) -> int:
    """Number of (b, B) above an anchor whose ground leaves ``outside`` window labels free."""
    if outside < reserve:
        return 0
    return sum(comb(outside, j) * 2 ** j for j in range(outside - reserve + 1))


@dataclass(frozen=True)
class GoodnessVerdict:
    good: bool
    counterexample: AnchoredPair | None = None
    extension_map: dict | None = None
    pairs: int = 0

    def to_json(self):
        out = {"good": self.good, "quantified_pairs": self.pairs}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample.to_json()
        if self.extension_map is not None:
            out["extension_map"] = [[q.to_json(), c.to_json()]
                                    for q, c in sorted(self.extension_map.items(), key=lambda kv: kv[0].key())]
        return out


def _bits(mask: int) -> list:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def _submasks_by_key(mask: int) -> list:
    """Nonempty submasks of ``mask`` in (size, lexicographic) order."""
    idx = _bits(mask)
    out = []
    for r in range(1, len(idx) + 1):
        for combo in combinations(idx, r):
            m = 0
            for i in combo:
                m |= 1 << i
            out.append(m)
    return out


class _GoodnessTable:
    """f-correctness of ``part | Z`` for every Z inside the outside labels U."""

    def __init__(self, F: PairColoring, part: int, outside: list, dom: list):
        m = len(outside)
        size = 1 << m
        lab = [0] * size
        for z in range(1, size):
            low = z & -z
            lab[z] = lab[z ^ low] | (1 << outside[low.bit_length() - 1])
        ok = bytearray(size)
        ev = F.eval_mask
        for z in range(1, size):
            cm = part | lab[z]
            for xm, col in dom:
                if ev(xm, cm) != col:
                    break
            else:
                ok[z] = 1
        self.m, self.full, self.lab, self.ok = m, size - 1, lab, ok
        self._memo = {}

    def any_ok(self, y: int, k: int) -> bool:
        """Whether ok[y | s] holds for some s inside k (s may be empty)."""
        if k == 0:
            return bool(self.ok[y])
        key = (y, k)
        hit = self._memo.get(key)
        if hit is None:
            low = k & -k
            hit = self.any_ok(y, k ^ low) or self.any_ok(y | low, k ^ low)
            self._memo[key] = hit
        return hit

    def extendable(self, y: int, k: int) -> bool:
        """Some nonempty s inside k makes ``part | y | s`` correct."""
        rest = k
        while rest:
            low = rest & -rest
            if self.any_ok(y | low, k ^ low):
                return True
            rest ^= low
        return False

    def least_extension(self, y: int, k: int):
        for s in _submasks_by_key(k):
            if self.ok[y | s]:
                return s
        return None


def _ordered_pairs(m: int, reserve: int):
    """Quantified (X, Y) in enumeration order.

    X (new ground labels) runs in (size, lexicographic) order; for each X the
    omitted part X - Y runs in (size, lexicographic) order, so the fullest
    finite part comes first.
    """
    idx = list(range(m))
    for size in range(m - reserve + 1):
        for xs in combinations(idx, size):
            X = sum(1 << i for i in xs)
            for osize in range(size + 1):
                for os_ in combinations(xs, osize):
                    yield X, X ^ sum(1 << i for i in os_)


def is_good_bounded(F: PairColoring, p: AnchoredPair, f: PartialColoring, win: Window, *,
                    pair_cap: int = DEFAULT_PAIR_CAP, witnesses: bool = False) -> GoodnessVerdict:
    """Decide whether (a, A) is good for f inside the window.

    A pair (b, B) above (a, A) only gets harder as B grows (its candidate
    extensions shrink), so the verdict is settled on the maximal pairs, those
    leaving exactly ``reserve`` labels free. The full ordered scan runs only
    to locate the least counterexample, or when ``witnesses`` is requested.
    """
    W = win.mask
    A, a = p.ground.mask, p.part.mask
    if A & ~W:
        raise InvalidInput(f"ground {p.ground} is not inside the window of width {win.width}")
    if not f.base <= p.part:
        raise InvalidInput(f"coloring base {f.base} is not a subset of {p.part}")
    outside = _bits(W & ~A)
    m, r = len(outside), win.reserve
    npairs = quantified_pair_count(m, r)
    if npairs > pair_cap:
        raise CapExceeded(f"{npairs} quantified pairs exceed the pair cap {pair_cap}")
    if npairs == 0:
        return GoodnessVerdict(True, None, {} if witnesses else None, 0)
    table = _GoodnessTable(F, a, outside, f.mask_items())
    ok, full = table.ok, table.full

    good = True
    for rs in combinations(range(m), r):
        R = sum(1 << i for i in rs)
        subs = _submasks_by_key(R)
        X = full ^ R
        Y = X
        while True:
            if not any(ok[Y | s] for s in subs):
                good = False
                break
            if Y == 0:
                break
            Y = (Y - 1) & X
        if not good:
            break

    def as_pair(X, Y):
        return AnchoredPair(FinSet.from_mask(a | table.lab[Y]), FinSet.from_mask(A | table.lab[X]))

    if good and not witnesses:
        return GoodnessVerdict(True, None, None, npairs)
    if good:
        ext = {}
        for X, Y in _ordered_pairs(m, r):
            s = table.least_extension(Y, full ^ X)
            ext[as_pair(X, Y)] = FinSet.from_mask(a | table.lab[Y | s])
        return GoodnessVerdict(True, None, ext, npairs)
    for X, Y in _ordered_pairs(m, r):
        if not table.extendable(Y, full ^ X):
            return GoodnessVerdict(False, as_pair(X, Y), None, npairs)
    raise AssertionError("maximal-pair scan and ordered scan disagree")  # pragma: no cover


@dataclass(frozen=True)
class LemmaResult:
    g: TotalColoring
    c: FinSet
    C: FinSet

    def to_json(self):
        return {"g": self.g.to_json(), "c": self.c.to_json(), "C": self.C.to_json()}


def _min_extra(room: int, reserve: int, pair_cap: int) -> int:
    """Fewest extra labels to add to C so its goodness check fits under the cap."""
    for t in range(room - reserve + 1):
        if quantified_pair_count(room - t, reserve) <= pair_cap:
            return t
    return room - reserve + 1


def _lemma_search(F, q: AnchoredPair, win: Window, f, enum_cap, pair_cap, budget, max_candidates, trace):
    if len(q.part) > enum_cap:
        raise CapExceeded(f"|b| = {len(q.part)} exceeds the enumeration cap {enum_cap}")
    if q.ground.mask & ~win.mask:
        raise InvalidInput(f"ground {q.ground} is not inside the window of width {win.width}")
    b, B = q.part, q.ground
    free = sorted(win.labels - B)
    checks = candidates = 0
    for size in range(1, len(free) + 1):
        for s in combinations(free, size):
            candidates += 1
            if candidates > max_candidates:
                if trace is not None:
                    trace.append({"event": "candidate-limit", "limit": max_candidates})
                return None
            c = b | FinSet(s)
            g = induced_total_coloring(F, b, c)
            if f is not None and not g.extends(f):
                continue
            base = B | c
            rest = sorted(win.labels - base)
            room = len(rest)
            for t in range(_min_extra(room, win.reserve, pair_cap), room - win.reserve + 1):
                for extra in combinations(rest, t):
                    if checks >= budget:
                        if trace is not None:
                            trace.append({"event": "budget", "limit": budget})
                        return None
                    checks += 1
                    C = base | FinSet(extra)
                    verdict = is_good_bounded(F, AnchoredPair(c, C), g, win, pair_cap=pair_cap)
                    if trace is not None:
                        trace.append({"c": c, "C": C, "good": verdict.good})
                    if verdict.good:
                        return LemmaResult(g, c, C)
    return None


def lemma22_search(F: PairColoring, q: AnchoredPair, win: Window, *, enum_cap: int = 4,
                   pair_cap: int = DEFAULT_PAIR_CAP, budget: int = 64, max_candidates: int = 4096,
                   trace: list | None = None) -> LemmaResult | None:
    """Find a total coloring g of q.part and (c, C) >= q good for g, c a g-correct proper extension.

    Candidates c run in (size, elements) order; g is the coloring c induces,
    the only one c can be correct for. For each c, sets C run in (size,
    elements) order from the smallest size whose goodness check fits under
    ``pair_cap``. Sound, not complete: ``None`` means nothing was found
    within the budget.
    """
    return _lemma_search(F, q, win, None, enum_cap, pair_cap, budget, max_candidates, trace)


def lemma23_search(F: PairColoring, p: AnchoredPair, f: PartialColoring, q: AnchoredPair, win: Window, *,
                   enum_cap: int = 4, pair_cap: int = DEFAULT_PAIR_CAP, budget: int = 64,
                   max_candidates: int = 4096, trace: list | None = None) -> LemmaResult | None:
    """Same search as :func:`lemma22_search`, restricted to colorings g that extend f."""
    if not pair_le(p, q):
        raise InvalidInput(f"precondition: {p} is not below {q}")
    if not is_good_bounded(F, p, f, win, pair_cap=pair_cap).good:
        raise InvalidInput(f"precondition: {p} is not good for the given coloring")
    return _lemma_search(F, q, win, f, enum_cap, pair_cap, budget, max_candidates, trace)


def failure_chain(F: PairColoring, q: AnchoredPair, win: Window, *, enum_cap: int = 2,
                  pair_cap: int = DEFAULT_PAIR_CAP, max_colorings: int = 4096) -> list:
    """Diagnostic for a failed search: the chain of counterexamples, one per total coloring.

    Step i asks whether the current pair is good for g_i; if not, its
    counterexample becomes the next pair. The run stops at the first g_i the
    current pair is good for.
    """
    if F.k ** (2 ** len(q.part)) > max_colorings:
        raise CapExceeded(f"{F.k}^(2^{len(q.part)}) total colorings exceed {max_colorings}")
    steps, cur = [], q
    for g in enumerate_total_colorings(q.part, F.k, enum_cap):
        v = is_good_bounded(F, cur, g, win, pair_cap=pair_cap)
        steps.append({"g": g, "pair": cur, "good": v.good, "next": v.counterexample})
        if v.good:
            break
        cur = v.counterexample
    return steps


@dataclass(frozen=True)
class Step:
    b: FinSet
    g: TotalColoring
    c: FinSet
    C: FinSet
    a: FinSet | None = None

    def to_json(self):
        out = {"b": self.b.to_json(), "g": self.g.to_json(), "c": self.c.to_json(), "C": self.C.to_json()}
        if self.a is not None:
            out["a"] = self.a.to_json()
        return out

    @classmethod
    def from_json(cls, obj, path):
        a = obj.get("a")
        g = PartialColoring.from_json(obj["g"], f"{path}.g")
        return cls(finset_from_json(obj["b"], f"{path}.b"), TotalColoring(g.base, g.assignments),
                   finset_from_json(obj["c"], f"{path}.c"), finset_from_json(obj["C"], f"{path}.C"),
                   None if a is None else finset_from_json(a, f"{path}.a"))


@dataclass(frozen=True)
class Extension:
    xi: int
    color: int
    steps: tuple
    G_added: tuple
    H_added: tuple

    def to_json(self):
        return {"xi": self.xi, "color": self.color, "steps": [s.to_json() for s in self.steps],
                "G_added": [x.to_json() for x in self.G_added], "H_added": [x.to_json() for x in self.H_added]}

    @classmethod
    def from_json(cls, obj, path):
        return cls(obj["xi"], obj["color"],
                   tuple(Step.from_json(s, f"{path}.steps[{i}]") for i, s in enumerate(obj["steps"])),
                   tuple(finset_from_json(x, f"{path}.G_added") for x in obj["G_added"]),
                   tuple(finset_from_json(x, f"{path}.H_added") for x in obj["H_added"]))


@dataclass(frozen=True)
class Approximation:
    ground_prefix: FinSet
    G: tuple
    H: tuple
    green: int
    log: tuple = ()
    extensions: tuple = ()

    def __post_init__(self):
        G = tuple(sorted({FinSet(x) for x in self.G}, key=set_key))
        H = tuple(sorted({FinSet(x) for x in self.H}, key=set_key))
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "ground_prefix", FinSet(self.ground_prefix))
        for x in G + H:
            if not x <= self.ground_prefix:
                raise InvalidInput(f"member {x} is not inside the ground prefix {self.ground_prefix}")

    def to_json(self):
        return {
            "schema": SCHEMA,
            "ground_prefix": self.ground_prefix.to_json(),
            "G": [x.to_json() for x in self.G],
            "H": [x.to_json() for x in self.H],
            "green": self.green,
            "log": [s.to_json() for s in self.log],
            "extensions": [e.to_json() for e in self.extensions],
        }

    @classmethod
    def from_json(cls, obj, path="approximation"):
        if not isinstance(obj, dict):
            raise InvalidInput("approximation must be an object", path)
        if obj.get("schema", SCHEMA) != SCHEMA:
            raise InvalidInput(f"unsupported schema {obj.get('schema')!r}", f"{path}.schema")
        try:
            return cls(finset_from_json(obj["ground_prefix"], f"{path}.ground_prefix"),
                       tuple(finset_from_json(x, f"{path}.G[{i}]") for i, x in enumerate(obj["G"])),
                       tuple(finset_from_json(x, f"{path}.H[{i}]") for i, x in enumerate(obj["H"])),
                       obj.get("green", 1),
                       tuple(Step.from_json(s, f"{path}.log[{i}]") for i, s in enumerate(obj.get("log", []))),
                       tuple(Extension.from_json(e, f"{path}.extensions[{i}]")
                             for i, e in enumerate(obj.get("extensions", []))))
        except KeyError as e:
            raise InvalidInput(f"missing field {e.args[0]!r}", path) from None


def window_guard(depth: int) -> int:
    """Smallest window width accepted for a construction of the given depth."""
    return depth * (depth + 3) // 2


def _first(labels: FinSet, n: int) -> FinSet:
    return FinSet(labels.sorted()[:n])


def _split_alternating(F, chain):
    eh = extract_end_homogeneous(F, chain)
    hom = extract_homogeneous(F, eh)
    seq = hom.members
    return hom.color, seq[0::2], seq[1::2]


def build_approximation(F: PairColoring, win: Window, depth: int, *, pair_cap: int = DEFAULT_PAIR_CAP,
                        budget: int = 64, enum_cap: int = 12, max_candidates: int = 4096) -> Approximation:
    """Grow c_0 < c_1 < ... with the lemma search, then split a homogeneous run into G and H.

    b_0 is the least label; b_{n+1} is c_n plus the first n labels of every
    C_i so far. A is the union of the C_i.
    """
    if depth < 1:
        raise InvalidInput("depth must be >= 1")
    if win.width < window_guard(depth):
        raise WindowExhausted(f"window {win.width} is too small for depth {depth} (need >= {window_guard(depth)})")
    log = []
    b = FinSet({0})
    for n in range(depth):
        if n:
            b = log[-1].c
            for st in log:
                b = b | _first(st.C, n - 1)
        if len(win.labels - b) <= win.reserve:
            raise WindowExhausted(f"no room left above b_{n} = {b} in window {win.width}")
        res = lemma22_search(F, AnchoredPair(b, b), win, enum_cap=enum_cap, pair_cap=pair_cap,
                             budget=budget, max_candidates=max_candidates)
        if res is None:
            raise ConstructionStuck(f"no good (c, C) found above b_{n} = {b}", log, n)
        log.append(Step(b, res.g, res.c, res.C))
    color, G, H = _split_alternating(F, [st.c for st in log])
    ground = FinSet()
    for st in log:
        ground = ground | st.C
    return Approximation(ground, G, H, color, tuple(log))


def increasing_sequence(G) -> list:
    """Greedy chain through G in (size, elements) order."""
    out = []
    for x in sorted(G, key=set_key):
        if not out or out[-1] < x:
            out.append(x)
    return out


def extend_approximation(F: PairColoring, approx: Approximation, xi: int, win: Window, depth: int, *,
                         pair_cap: int = DEFAULT_PAIR_CAP, budget: int = 64, enum_cap: int = 12,
                         max_candidates: int = 4096, check: bool = True) -> Approximation:
    """Add the label ``xi`` to the ground set while keeping G and H on the old part intact.

    Walks an increasing sequence a_n through G. b_0 = a_0 + {xi}; later b_n
    are a_n plus the new labels of c_{n-1} and the first n-1 new labels of
    every C_i. Each step is a restricted search under the coloring H induces
    on a_n.
    """
    A = approx.ground_prefix
    if xi in A:
        raise InvalidInput(f"label {xi} is already in the ground prefix")
    if not 0 <= xi < win.width:
        raise InvalidInput(f"label {xi} is outside the window of width {win.width}")
    if check:
        report = verify_approximation(F, approx, win, pair_cap=pair_cap)
        if not report.ok:
            raise InvalidInput(f"precondition: approximation fails clause {report.failed()[0]}")
    seq = increasing_sequence(approx.G)
    steps = []
    for n, a_n in enumerate(seq[:depth]):
        f_n = derive_f_H_a(F, approx.H, a_n)
        if n == 0:
            b = a_n | {xi}
        else:
            b = a_n | (steps[-1].c - A)
            for st in steps:
                b = b | _first(st.C - A, n - 1)
        q = AnchoredPair(b, A | b)
        if len(win.labels - q.ground) <= win.reserve:
            raise WindowExhausted(f"no room left above {q} in window {win.width}")
        res = lemma23_search(F, AnchoredPair(a_n, A), f_n, q, win, enum_cap=enum_cap, pair_cap=pair_cap,
                             budget=budget, max_candidates=max_candidates)
        if res is None:
            raise ConstructionStuck(f"no good (c, C) found above {q}", steps, n)
        steps.append(Step(b, res.g, res.c, res.C, a_n))
    if not steps:
        raise InvalidInput("approximation has an empty G; nothing to extend along")
    color, G_new, H_new = _split_alternating(F, [st.c for st in steps])
    ground = A
    for st in steps:
        ground = ground | st.C
    ext = Extension(xi, color, tuple(steps), tuple(G_new), tuple(H_new))
    return Approximation(ground, approx.G + tuple(G_new), approx.H + tuple(H_new), approx.green,
                         approx.log, approx.extensions + (ext,))


@dataclass(frozen=True)
class Clause:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json(self):
        return {"clause": self.name, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class ApproxReport:
    clauses: tuple

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.clauses)

    def failed(self) -> list:
        return [c.name for c in self.clauses if not c.passed]

    def clause(self, name) -> Clause:
        return next(c for c in self.clauses if c.name == name)

    def to_json(self):
        return {"ok": self.ok, "clauses": [c.to_json() for c in self.clauses]}


def _coverage(members, labels, cap):
    m = 0
    for i, new in enumerate(labels[:cap]):
        if not dominates(members, [s | {new} for s in subsets(labels[:i])]).cofinal:
            break
        m = i + 1
    return m


def end_homogeneity_violation(F: PairColoring, H) -> tuple | None:
    """First (x, y, z) in H with x < y, x < z and different colors, or None."""
    hs = sorted(H, key=set_key)
    for x in hs:
        above = [y for y in hs if x < y]
        if len(above) < 2:
            continue
        first = F.eval_mask(x.mask, above[0].mask)
        for z in above[1:]:
            if F.eval_mask(x.mask, z.mask) != first:
                return x, above[0], z
    return None


def verify_approximation(F: PairColoring, approx: Approximation, win: Window, *,
                         pair_cap: int = DEFAULT_PAIR_CAP, coverage_cap: int = 16) -> ApproxReport:
    """Check the four approximation clauses; failures are returned, never raised.

    Cofinality is checked on a prefix: the first labels of the ground set
    whose subsets are all dominated by both G and H (scanned exhaustively
    up to ``coverage_cap`` labels). It passes when G and H are nonempty and
    that prefix is nonempty.
    """
    G, H, A = approx.G, approx.H, approx.ground_prefix
    clauses = []

    common = sorted(set(G) & set(H), key=set_key)
    clauses.append(Clause("disjoint", not common,
                          {"common": [x.to_json() for x in common[:1]]}))

    labels = list(A.sorted())
    mG, mH = _coverage(G, labels, coverage_cap), _coverage(H, labels, coverage_cap)
    m = min(mG, mH)
    cof = bool(G) and bool(H) and (m >= 1 or not labels)
    clauses.append(Clause("cofinal", cof, {"prefix": labels[:m], "prefix_size": m, "ground_size": len(labels),
                                           "coverage_G": mG, "coverage_H": mH}))

    bad = end_homogeneity_violation(F, H)
    clauses.append(Clause("end_homogeneous", bad is None,
                          {} if bad is None else {"violation": [s.to_json() for s in bad]}))

    good_detail, good_ok = [], True
    for a in G:
        row = {"a": a.to_json()}
        try:
            f = derive_f_H_a(F, H, a)
            v = is_good_bounded(F, AnchoredPair(a, A), f, win, pair_cap=pair_cap)
            row["good"] = v.good
            if not v.good:
                row["counterexample"] = v.counterexample.to_json()
        except WitnessDisagreement as e:
            row["good"] = False
            row["error"] = str(e)
        except CapExceeded as e:
            row["good"] = False
            row["error"] = f"undecided: {e}"
        good_ok = good_ok and row["good"]
        good_detail.append(row)
    clauses.append(Clause("good", good_ok, {"members": good_detail}))
    return ApproxReport(tuple(clauses))
