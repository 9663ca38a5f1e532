"""Finite sets of labels, the inclusion order and anchored pairs.

Everything here is immutable. Sets are ``FinSet`` values (a ``frozenset``
subclass with a canonical ordering); hot loops elsewhere work on the
equivalent integer bitmasks, see :meth:`FinSet.mask`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Sequence

from .errors import InvalidInput


class FinSet(frozenset):
    """A finite set of non-negative integer labels.

    Inherits ``<`` (proper subset) and ``<=`` from ``frozenset``; use
    :meth:`key` for the canonical (size, elements) enumeration order.
    """

    __slots__ = ()

    def __new__(cls, labels: Iterable[int] = ()):
        if isinstance(labels, FinSet):
            return labels
        items = list(labels)
        for v in items:
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise InvalidInput(f"label must be a non-negative integer, got {v!r}")
        return super().__new__(cls, items)

    @classmethod
    def from_mask(cls, mask: int) -> "FinSet":
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(i)
            mask >>= 1
            i += 1
        return super().__new__(cls, out)

    @property
    def mask(self) -> int:
        m = 0
        for v in self:
            m |= 1 << v
        return m

    def sorted(self) -> tuple:
        return tuple(sorted(self))

    def key(self) -> tuple:
        return (len(self), self.sorted())

    def max(self, default=None):
        return max(self) if self else default

    def __or__(self, other):
        return FinSet(frozenset.__or__(self, other))

    def __and__(self, other):
        return FinSet(frozenset.__and__(self, other))

    def __sub__(self, other):
        return FinSet(frozenset.__sub__(self, other))

    def __xor__(self, other):
        return FinSet(frozenset.__xor__(self, other))

    __ror__ = __or__
    __rand__ = __and__

    def __repr__(self):
        return "{" + ",".join(map(str, self.sorted())) + "}"

    def to_json(self) -> list:
        return list(self.sorted())


EMPTY = FinSet()


def canonicalize(labels: Iterable[int]) -> FinSet:
    return FinSet(labels)


def finset_from_json(value, path="") -> FinSet:
    """Parse a JSON array; rejects unsorted or duplicated input."""
    if not isinstance(value, list):
        raise InvalidInput("expected an array of labels", path)
    s = FinSet(value) if all(isinstance(v, int) and not isinstance(v, bool) for v in value) else None
    if s is None:
        raise InvalidInput("labels must be integers", path)
    if list(s.sorted()) != value:
        raise InvalidInput(f"set {value} is not in canonical ascending form", path)
    return s


def set_key(x: FinSet) -> tuple:
    return x.key()


def is_proper_subset(x: FinSet, y: FinSet) -> bool:
    return x < y


def is_a_extension(a: FinSet, A: FinSet, b: FinSet, proper: bool = False) -> bool:
    """``b`` is an ``A``-extension of ``a``: a <= b and b & A == a."""
    if not a <= A:
        raise InvalidInput(f"{a} is not a subset of {A}")
    if not a <= b or (b & A) != a:
        return False
    return a < b if proper else True


@dataclass(frozen=True)
class AnchoredPair:
    """The pair (a, A): finite part ``part`` inside the surrogate ground set."""

    part: FinSet
    ground: FinSet

    def __post_init__(self):
        object.__setattr__(self, "part", FinSet(self.part))
        object.__setattr__(self, "ground", FinSet(self.ground))
        if not self.part <= self.ground:
            raise InvalidInput(f"part {self.part} is not contained in ground {self.ground}")

    def key(self):
        return (self.ground.key(), self.part.key())

    def to_json(self):
        return {"part": self.part.to_json(), "ground": self.ground.to_json()}

    @classmethod
    def from_json(cls, obj, path=""):
        if not isinstance(obj, dict):
            raise InvalidInput("anchored pair must be an object", path)
        return cls(finset_from_json(obj.get("part"), f"{path}.part"),
                   finset_from_json(obj.get("ground"), f"{path}.ground"))

    def __repr__(self):
        return f"({self.part!r}, {self.ground!r})"


def pair_le(p: AnchoredPair, q: AnchoredPair) -> bool:
    return p.ground <= q.ground and is_a_extension(p.part, p.ground, q.part)


def subsets(base: Iterable[int], proper: bool = False) -> Iterator[FinSet]:
    """All subsets of ``base`` in (cardinality, lexicographic) order."""
    items = sorted(set(base))
    top = len(items) - 1 if proper else len(items)
    for r in range(top + 1):
        for combo in combinations(items, r):
            yield FinSet(combo)


def window(width: int) -> FinSet:
    return FinSet(range(width))


@dataclass(frozen=True)
class CofinalityReport:
    cofinal: bool
    witness_map: dict = field(default_factory=dict)
    counterexample: FinSet | None = None

    def to_json(self):
        out = {"cofinal": self.cofinal}
        if self.cofinal:
            out["witness_map"] = [[x.to_json(), y.to_json()]
                                  for x, y in sorted(self.witness_map.items(), key=lambda kv: kv[0].key())]
        else:
            out["counterexample"] = self.counterexample.to_json()
        return out


def dominates(H: Iterable[FinSet], targets: Iterable[FinSet]) -> CofinalityReport:
    """Check that every target has a superset in ``H``.

    Witnesses are the least superset in (size, elements) order; the
    counterexample is the least undominated target.
    """
    hs = sorted({FinSet(h) for h in H}, key=set_key)
    witnesses = {}
    for x in sorted({FinSet(t) for t in targets}, key=set_key):
        y = next((h for h in hs if x <= h), None)
        if y is None:
            return CofinalityReport(False, counterexample=x)
        witnesses[x] = y
    return CofinalityReport(True, witness_map=witnesses)


class FinPoset:
    """A finite strict partial order on opaque integer node ids.

    The relation is closed transitively on construction, so ``lt`` is O(1).
    ``names`` is an optional display label per node.
    """

    def __init__(self, elements: Sequence[int], lt: Iterable[tuple], names: dict | None = None):
        self.elements = tuple(elements)
        if len(set(self.elements)) != len(self.elements):
            raise InvalidInput("duplicate poset elements")
        index = {e: i for i, e in enumerate(self.elements)}
        n = len(self.elements)
        down = [0] * n
        for x, y in lt:
            if x not in index or y not in index:
                raise InvalidInput(f"relation ({x}, {y}) mentions an unknown element")
            down[index[y]] |= 1 << index[x]
        # Warshall closure on bitmasks
        for k in range(n):
            bk = 1 << k
            dk = down[k]
            for i in range(n):
                if down[i] & bk:
                    down[i] |= dk
        for i in range(n):
            if down[i] >> i & 1:
                raise InvalidInput(f"relation is not irreflexive at {self.elements[i]} (cycle)")
        self._index = index
        self._down = down
        self.names = dict(names or {})

    def __len__(self):
        return len(self.elements)

    def index(self, e) -> int:
        return self._index[e]

    def down_mask(self, i: int) -> int:
        """Bitmask (over positions) of strict predecessors of position ``i``."""
        return self._down[i]

    def up_mask(self, i: int) -> int:
        bit = 1 << i
        return sum(1 << j for j in range(len(self.elements)) if self._down[j] & bit)

    def lt(self, x, y) -> bool:
        return bool(self._down[self._index[y]] >> self._index[x] & 1)

    def le(self, x, y) -> bool:
        return x == y or self.lt(x, y)

    def relation(self) -> list:
        return sorted((self.elements[i], self.elements[j])
                      for j in range(len(self.elements))
                      for i in range(len(self.elements)) if self._down[j] >> i & 1)

    def maximal(self) -> list:
        return [e for i, e in enumerate(self.elements)
                if not any(self._down[j] >> i & 1 for j in range(len(self.elements)))]

    def is_directed(self) -> bool:
        els = self.elements
        for a in range(len(els)):
            for b in range(a + 1, len(els)):
                if not any(self.le(els[a], z) and self.le(els[b], z) for z in els):
                    return False
        return True

    def name(self, e) -> str:
        return self.names.get(e, str(e))

    def to_json(self):
        # generating set = covering relation, closure recomputed on load
        rel = self.relation()
        covers = [(x, y) for x, y in rel
                  if not any(self.lt(x, z) and self.lt(z, y) for z in self.elements)]
        out = {"elements": list(self.elements), "lt": [list(p) for p in covers]}
        if self.names:
            out["names"] = {str(k): v for k, v in sorted(self.names.items())}
        return out

    @classmethod
    def from_json(cls, obj, path=""):
        if not isinstance(obj, dict) or "elements" not in obj:
            raise InvalidInput("poset must be an object with 'elements' and 'lt'", path)
        els = obj["elements"]
        if not all(isinstance(e, int) and not isinstance(e, bool) for e in els):
            raise InvalidInput("poset elements must be integers", f"{path}.elements")
        lt = obj.get("lt", [])
        for i, p in enumerate(lt):
            if not (isinstance(p, list) and len(p) == 2):
                raise InvalidInput("relation entries must be [i, j] pairs", f"{path}.lt[{i}]")
        names = {int(k): v for k, v in obj.get("names", {}).items()}
        return cls(els, [tuple(p) for p in lt], names)

    def __eq__(self, other):
        return (isinstance(other, FinPoset) and self.elements == other.elements
                and self.relation() == other.relation() and self.names == other.names)

    def __repr__(self):
        return f"FinPoset({len(self.elements)} elements, {len(self.relation())} relations)"


def subset_poset(base: Iterable[int]) -> FinPoset:
    """The inclusion order on all subsets of ``base``; node ids follow :func:`subsets`."""
    sets = list(subsets(base))
    lt = [(i, j) for i, x in enumerate(sets) for j, y in enumerate(sets) if x < y]
    return FinPoset(range(len(sets)), lt, {i: repr(s) for i, s in enumerate(sets)})
