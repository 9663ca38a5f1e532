"""Pair colorings F(x, y) for x a proper subset of y, and colorings of subsets.

A :class:`PairColoring` answers ``eval(x, y)`` on FinSets and ``eval_mask``
on integer bitmasks (the fast path used by the search engines).
"""
from __future__ import annotations

from itertools import product
from typing import Iterable, Iterator, Mapping

from .errors import (CapExceeded, InvalidInput, NotProperSubset, OutOfDomain,
                     UnknownRule, WitnessDisagreement)
from .lattice import FinSet, finset_from_json, set_key, subsets


def _const1(x: int, y: int) -> int:
    return 1


def _parity(x: int, y: int) -> int:
    return 1 if (y & ~x).bit_count() % 2 == 0 else 2


def _topsize(x: int, y: int) -> int:
    return 1 if y.bit_count() % 2 == 0 else 2


def _maxgap(x: int, y: int) -> int:
    # bit_length() - 1 is max label, and -1 for the empty set (the sentinel)
    return 1 if ((y.bit_length() - 1) - (x.bit_length() - 1)) % 2 == 0 else 2


RULES = {
    "CONST1": _const1,
    "PARITY": _parity,
    "TOPSIZE": _topsize,
    "MAXGAP": _maxgap,
}


class PairColoring:
    """Base class: a total, deterministic k-coloring of inclusion pairs."""

    k: int

    def eval(self, x: FinSet, y: FinSet) -> int:
        x, y = FinSet(x), FinSet(y)
        if not x < y:
            raise NotProperSubset(f"{x} is not a proper subset of {y}")
        self._check_domain(x, y)
        return self.eval_mask(x.mask, y.mask)

    def eval_mask(self, x: int, y: int) -> int:
        raise NotImplementedError

    def _check_domain(self, x: FinSet, y: FinSet):
        pass

    def to_json(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.to_json() == other.to_json()

    def __hash__(self):
        return hash(repr(self.to_json()))


class RuleColoring(PairColoring):
    def __init__(self, rule: str, k: int = 2):
        if rule not in RULES:
            raise UnknownRule(f"unknown rule {rule!r}; known: {', '.join(RULES)}")
        if k < (1 if rule == "CONST1" else 2):
            raise InvalidInput(f"rule {rule} needs k >= 2, got {k}")
        self.rule = rule
        self.k = k
        self.eval_mask = RULES[rule]

    def to_json(self):
        return {"k": self.k, "rule": self.rule}

    def __repr__(self):
        return f"RuleColoring({self.rule!r}, k={self.k})"


CONST1 = RuleColoring("CONST1")
PARITY = RuleColoring("PARITY")
TOPSIZE = RuleColoring("TOPSIZE")
MAXGAP = RuleColoring("MAXGAP")


def window_pairs(width: int) -> list:
    """All inclusion pairs (x, y), x < y <= {0..width-1}, as bitmask tuples.

    Order: by y in (size, elements) order, then x likewise. This order fixes
    the digit positions of a table coloring's integer index.
    """
    sets = list(subsets(range(width)))
    return [(x.mask, y.mask) for y in sets for x in sets if x < y]


class TableColoring(PairColoring):
    """Explicit color table covering every inclusion pair of a window."""

    def __init__(self, k: int, table: Mapping, width: int):
        self.k = k
        self.width = width
        t = {}
        for (x, y), c in table.items():
            xm = x if isinstance(x, int) else FinSet(x).mask
            ym = y if isinstance(y, int) else FinSet(y).mask
            if not (isinstance(c, int) and 1 <= c <= k):
                raise InvalidInput(f"color {c!r} outside 1..{k}")
            t[(xm, ym)] = c
        missing = [p for p in window_pairs(width) if p not in t]
        extra = [p for p in t if (p[1] >> width) or (p[0] & ~p[1]) or p[0] == p[1]]
        if missing:
            x, y = missing[0]
            raise InvalidInput(f"table is not total: no color for ({FinSet.from_mask(x)}, {FinSet.from_mask(y)})")
        if extra:
            x, y = extra[0]
            pair = f"({FinSet.from_mask(x)}, {FinSet.from_mask(y)})"
            raise InvalidInput(f"table entry {pair} is not an inclusion pair of the window")
        self._table = t

    def eval_mask(self, x: int, y: int) -> int:
        return self._table[(x, y)]

    @classmethod
    def from_index(cls, width: int, k: int, index: int, pairs=None) -> "TableColoring":
        """Decode a base-k integer into a table (digit i colors ``window_pairs(width)[i]``)."""
        pairs = pairs if pairs is not None else window_pairs(width)
        table = {}
        for p in pairs:
            index, digit = divmod(index, k)
            table[p] = digit + 1
        return cls(k, table, width)

    def _check_domain(self, x, y):
        if y.mask >> self.width:
            raise OutOfDomain(f"pair ({x}, {y}) lies outside window {self.width}")

    def to_json(self):
        rows = sorted(([FinSet.from_mask(x).to_json(), FinSet.from_mask(y).to_json(), c]
                       for (x, y), c in self._table.items()),
                      key=lambda r: (FinSet(r[1]).key(), FinSet(r[0]).key()))
        return {"k": self.k, "table": rows, "window": self.width}

    def __repr__(self):
        return f"TableColoring(k={self.k}, window={self.width})"


class ConstraintColoring(PairColoring):
    """Explicit colors on some pairs, a default color everywhere else."""

    def __init__(self, k: int, constraints: Mapping, default: int = 1):
        if not 1 <= default <= k:
            raise InvalidInput(f"default color {default} outside 1..{k}")
        self.k = k
        self.default = default
        t = {}
        for (x, y), c in constraints.items():
            x, y = FinSet(x), FinSet(y)
            if not x < y:
                raise InvalidInput(f"constraint on ({x}, {y}) is not an inclusion pair")
            if not 1 <= c <= k:
                raise InvalidInput(f"color {c} outside 1..{k}")
            t[(x.mask, y.mask)] = c
        self._constraints = t

    def eval_mask(self, x: int, y: int) -> int:
        return self._constraints.get((x, y), self.default)

    @property
    def constraints(self) -> dict:
        return {(FinSet.from_mask(x), FinSet.from_mask(y)): c for (x, y), c in self._constraints.items()}

    def to_json(self):
        rows = sorted(([FinSet.from_mask(x).to_json(), FinSet.from_mask(y).to_json(), c]
                       for (x, y), c in self._constraints.items()),
                      key=lambda r: (FinSet(r[1]).key(), FinSet(r[0]).key()))
        return {"k": self.k, "constraints": rows, "default": self.default}

    def __repr__(self):
        return f"ConstraintColoring(k={self.k}, {len(self._constraints)} constraints, default={self.default})"


def _int(v, path, lo=None):
    if isinstance(v, bool) or not isinstance(v, int) or (lo is not None and v < lo):
        raise InvalidInput(f"expected an integer{'' if lo is None else f' >= {lo}'}, got {v!r}", path)
    return v


def _triples(rows, path):
    if not isinstance(rows, list):
        raise InvalidInput("expected an array of [x, y, color] rows", path)
    out = {}
    for i, row in enumerate(rows):
        p = f"{path}[{i}]"
        if not (isinstance(row, list) and len(row) == 3):
            raise InvalidInput("row must be [x, y, color]", p)
        key = (finset_from_json(row[0], p + "[0]"), finset_from_json(row[1], p + "[1]"))
        if key in out:
            raise InvalidInput(f"duplicate row for pair {key}", p)
        out[key] = _int(row[2], p + "[2]", 1)
    return out


def coloring_from_json(obj, path="coloring") -> PairColoring:
    if not isinstance(obj, dict):
        raise InvalidInput("coloring must be an object", path)
    k = _int(obj.get("k"), f"{path}.k", 1)
    kinds = [key for key in ("rule", "table", "constraints") if key in obj]
    if len(kinds) != 1:
        raise InvalidInput("coloring needs exactly one of 'rule', 'table', 'constraints'", path)
    if "rule" in obj:
        return RuleColoring(obj["rule"], k)
    if "table" in obj:
        width = _int(obj.get("window"), f"{path}.window", 0)
        return TableColoring(k, _triples(obj["table"], f"{path}.table"), width)
    default = _int(obj.get("default", 1), f"{path}.default", 1)
    return ConstraintColoring(k, _triples(obj["constraints"], f"{path}.constraints"), default)


class PartialColoring:
    """A color for some subsets of ``base``."""

    def __init__(self, base: Iterable[int], assignments: Mapping | None = None):
        self.base = FinSet(base)
        items = {}
        for x, c in (assignments or {}).items():
            x = FinSet(x)
            if not x <= self.base:
                raise InvalidInput(f"{x} is not a subset of base {self.base}")
            if isinstance(c, bool) or not isinstance(c, int) or c < 1:
                raise InvalidInput(f"color {c!r} for {x} is not a positive integer")
            items[x] = c
        self.assignments = dict(sorted(items.items(), key=lambda kv: kv[0].key()))

    def __getitem__(self, x):
        return self.assignments[FinSet(x)]

    def __contains__(self, x):
        return FinSet(x) in self.assignments

    def __len__(self):
        return len(self.assignments)

    def domain(self) -> list:
        return list(self.assignments)

    def items(self):
        return self.assignments.items()

    def mask_items(self) -> list:
        return [(x.mask, c) for x, c in self.assignments.items()]

    def is_total(self) -> bool:
        return len(self.assignments) == 2 ** len(self.base)

    def restrict(self, keys: Iterable) -> "PartialColoring":
        keys = {FinSet(x) for x in keys}
        return PartialColoring(self.base, {x: c for x, c in self.assignments.items() if x in keys})

    def extends(self, other: "PartialColoring") -> bool:
        """True when every assignment of ``other`` appears here unchanged."""
        return all(self.assignments.get(x) == c for x, c in other.items())

    def submaps(self) -> Iterator["PartialColoring"]:
        dom = self.domain()
        for keep in subsets(range(len(dom))):
            yield self.restrict(dom[i] for i in keep)

    def to_json(self):
        return {"base": self.base.to_json(), "map": [[x.to_json(), c] for x, c in self.assignments.items()]}

    @classmethod
    def from_json(cls, obj, path="f"):
        if not isinstance(obj, dict):
            raise InvalidInput("partial coloring must be an object", path)
        base = finset_from_json(obj.get("base"), f"{path}.base")
        rows = obj.get("map", [])
        if not isinstance(rows, list):
            raise InvalidInput("map must be an array of [subset, color]", f"{path}.map")
        items = {}
        for i, row in enumerate(rows):
            p = f"{path}.map[{i}]"
            if not (isinstance(row, list) and len(row) == 2):
                raise InvalidInput("entry must be [subset, color]", p)
            x = finset_from_json(row[0], p + "[0]")
            if x in items:
                raise InvalidInput(f"duplicate key {x}", p)
            if not x <= base:
                raise InvalidInput(f"{x} is not a subset of base {base}", p)
            items[x] = _int(row[1], p + "[1]", 1)
        return cls(base, items)

    def __eq__(self, other):
        return (isinstance(other, PartialColoring) and self.base == other.base
                and self.assignments == other.assignments)

    def __hash__(self):
        return hash((self.base, tuple(self.assignments.items())))

    def __repr__(self):
        body = ", ".join(f"{x!r}->{c}" for x, c in self.assignments.items())
        return f"{type(self).__name__}(base={self.base!r}, {{{body}}})"


class TotalColoring(PartialColoring):
    def __init__(self, base, assignments):
        super().__init__(base, assignments)
        if not self.is_total():
            raise InvalidInput(f"total coloring of {self.base} needs {2 ** len(self.base)} entries, got {len(self)}")


def is_f_correct(F: PairColoring, f: PartialColoring, b: FinSet):
    """Return ``(ok, violation)``; the violation is the least x with F(x, b) != f(x)."""
    b = FinSet(b)
    if not f.base < b:
        raise InvalidInput(f"base {f.base} is not a proper subset of {b}")
    bm = b.mask
    for x, c in f.items():
        if F.eval_mask(x.mask, bm) != c:
            return False, x
    return True, None


def induced_total_coloring(F: PairColoring, b: FinSet, c: FinSet) -> TotalColoring:
    b, c = FinSet(b), FinSet(c)
    if not b < c:
        raise InvalidInput(f"{b} is not a proper subset of {c}")
    cm = c.mask
    return TotalColoring(b, {x: F.eval_mask(x.mask, cm) for x in subsets(b)})


def enumerate_total_colorings(b: FinSet, k: int, cap: int = 4) -> Iterator[TotalColoring]:
    b = FinSet(b)
    if len(b) > cap:
        raise CapExceeded(f"|b| = {len(b)} exceeds the enumeration cap {cap}")
    dom = list(subsets(b))
    for colors in product(range(1, k + 1), repeat=len(dom)):
        yield TotalColoring(b, dict(zip(dom, colors)))


def derive_f_H_a(F: PairColoring, H: Iterable[FinSet], a: FinSet, report: bool = False):
    """The coloring of a's proper subsets lying in H, read off witnesses in H.

    Lower sets with no witness above them are left out of the domain; pass
    ``report=True`` to also get that list.
    """
    a = FinSet(a)
    hs = sorted({FinSet(h) for h in H}, key=set_key)
    values, missing = {}, []
    for x in hs:
        if not x < a:
            continue
        above = [y for y in hs if x < y]
        if not above:
            missing.append(x)
            continue
        xm = x.mask
        first = F.eval_mask(xm, above[0].mask)
        for y in above[1:]:
            c = F.eval_mask(xm, y.mask)
            if c != first:
                raise WitnessDisagreement(x, above[0], y, first, c)
        values[x] = first
    f = PartialColoring(a, values)
    return (f, missing) if report else f
