"""End-homogeneous extraction along chains and the pigeonhole refinement.

The greedy splitter takes the head of the remaining chain, groups the rest
by the color they make with the head and keeps the largest group. Whatever
survives is end-homogeneous: the color of (s_i, s_j) depends only on i.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import islice
from typing import Iterable, Sequence

from .coloring import PairColoring
from .errors import CapExceeded, InvalidInput, VerificationFailure
from .lattice import FinSet, dominates, finset_from_json, subsets


def make_chain(sets: Iterable) -> tuple:
    chain = tuple(FinSet(s) for s in sets)
    for i in range(len(chain) - 1):
        if not chain[i] < chain[i + 1]:
            raise InvalidInput(f"chain is not strictly increasing at position {i}: {chain[i]} vs {chain[i + 1]}")
    return chain


def prefix_chain(n: int, labels: Sequence[int] | None = None) -> tuple:
    """c_i = first i+1 labels (default labels 0, 1, 2, ...)."""
    labels = list(range(n)) if labels is None else list(labels)[:n]
    return tuple(FinSet(labels[:i + 1]) for i in range(n))


def chain_from_json(rows, path="chain") -> tuple:
    if not isinstance(rows, list):
        raise InvalidInput("chain must be an array of sets", path)
    return make_chain(finset_from_json(r, f"{path}[{i}]") for i, r in enumerate(rows))


@dataclass(frozen=True)
class EndHomogeneousCertificate:
    subsequence: tuple
    end_colors: tuple
    violations: tuple = ()
    verified: bool = False

    def to_json(self):
        return {
            "subsequence": [s.to_json() for s in self.subsequence],
            "end_colors": list(self.end_colors),
            "violations": [[i, j, c] for i, j, c in self.violations],
            "verified": self.verified,
        }

    @classmethod
    def from_json(cls, obj, path="certificate"):
        if not isinstance(obj, dict):
            raise InvalidInput("certificate must be an object", path)
        seq = chain_from_json(obj.get("subsequence"), f"{path}.subsequence")
        colors = obj.get("end_colors", [])
        if not isinstance(colors, list) or len(colors) != max(len(seq) - 1, 0):
            raise InvalidInput("end_colors must list one color per non-final member", f"{path}.end_colors")
        return cls(seq, tuple(colors), (), False)


@dataclass(frozen=True)
class HomogeneousCertificate:
    members: tuple
    color: int
    checked_pairs: int
    verified: bool = False

    def to_json(self):
        return {
            "members": [s.to_json() for s in self.members],
            "color": self.color,
            "checked_pairs": self.checked_pairs,
            "verified": self.verified,
        }

    @classmethod
    def from_json(cls, obj, path="certificate"):
        if not isinstance(obj, dict):
            raise InvalidInput("certificate must be an object", path)
        members = [finset_from_json(r, f"{path}.members[{i}]") for i, r in enumerate(obj.get("members", []))]
        return cls(tuple(sorted(members, key=FinSet.key)), obj.get("color", 1), obj.get("checked_pairs", 0), False)


def end_homogeneity_violations(F: PairColoring, seq: Sequence[FinSet], end_colors: Sequence[int]) -> list:
    """All (i, j, actual color) with i < j where F(s_i, s_j) differs from end_colors[i]."""
    out = []
    masks = [s.mask for s in seq]
    for i in range(len(seq) - 1):
        for j in range(i + 1, len(seq)):
            c = F.eval_mask(masks[i], masks[j])
            if c != end_colors[i]:
                out.append((i, j, c))
    return out


def verify_end_homogeneous(F: PairColoring, cert: EndHomogeneousCertificate) -> EndHomogeneousCertificate:
    make_chain(cert.subsequence)
    v = end_homogeneity_violations(F, cert.subsequence, cert.end_colors)
    return EndHomogeneousCertificate(cert.subsequence, cert.end_colors, tuple(v), not v)


def extract_end_homogeneous(F: PairColoring, chain: Sequence[FinSet]) -> EndHomogeneousCertificate:
    remaining = list(make_chain(chain))
    out, colors = [], []
    while remaining:
        head, rest = remaining[0], remaining[1:]
        out.append(head)
        if not rest:
            break
        classes: dict = {}
        hm = head.mask
        for s in rest:
            classes.setdefault(F.eval_mask(hm, s.mask), []).append(s)
        color = max(classes, key=lambda c: (len(classes[c]), -c))
        colors.append(color)
        remaining = classes[color]
    return verify_end_homogeneous(F, EndHomogeneousCertificate(tuple(out), tuple(colors)))


def size_lower_bound(n: int, k: int) -> int:
    """floor(log_k(n(k-1) + 1)), computed exactly in integers."""
    target = n * (k - 1) + 1
    t, power = 0, k
    while power <= target:
        t += 1
        power *= k
    return t


def homogeneous_violations(F: PairColoring, members: Sequence[FinSet], color: int):
    bad, checked = [], 0
    for x in members:
        for y in members:
            if x < y:
                checked += 1
                c = F.eval_mask(x.mask, y.mask)
                if c != color:
                    bad.append((x, y, c))
    return bad, checked


def extract_homogeneous(F: PairColoring, eh: EndHomogeneousCertificate) -> HomogeneousCertificate:
    checked = verify_end_homogeneous(F, eh)
    if not checked.verified:
        i, j, c = checked.violations[0]
        raise VerificationFailure(f"end-homogeneous certificate is corrupt: pair ({i}, {j}) has color {c}, "
                                  f"expected {eh.end_colors[i]}")
    seq = eh.subsequence
    if not seq:
        return HomogeneousCertificate((), 1, 0, True)
    counts = {i: 0 for i in range(1, F.k + 1)}
    for c in eh.end_colors:
        counts[c] = counts.get(c, 0) + 1
    color = max(counts, key=lambda c: (counts[c], -c))
    members = tuple(s for s, c in zip(seq, eh.end_colors) if c == color) + (seq[-1],)
    bad, npairs = homogeneous_violations(F, members, color)
    if bad:
        x, y, c = bad[0]
        raise VerificationFailure(f"pair ({x}, {y}) has color {c}, expected {color}")
    return HomogeneousCertificate(members, color, npairs, True)


def verify_homogeneous(F: PairColoring, cert: HomogeneousCertificate) -> HomogeneousCertificate:
    bad, npairs = homogeneous_violations(F, cert.members, cert.color)
    return HomogeneousCertificate(cert.members, cert.color, npairs, not bad)


@dataclass(frozen=True)
class CountableResult:
    certificate: HomogeneousCertificate
    end_homogeneous: EndHomogeneousCertificate
    labels: tuple
    m: int

    def to_json(self):
        return {
            "labels": list(self.labels),
            "end_homogeneous": self.end_homogeneous.to_json(),
            "homogeneous": self.certificate.to_json(),
            "coverage_m": self.m,
        }


def coverage_bound(H: Iterable[FinSet], labels: Sequence[int], scan_cap: int = 20) -> int:
    """Largest m such that every subset of the first m labels lies under a member of H.

    Scans subsets exhaustively, adding the subsets that contain the next label
    at each step.
    """
    if len(labels) > scan_cap:
        raise CapExceeded(f"coverage scan over {len(labels)} labels exceeds cap {scan_cap}")
    hs = list(H)
    m = 0
    for i, new in enumerate(labels):
        fresh = [s | {new} for s in subsets(labels[:i])]
        if not dominates(hs, fresh).cofinal:
            break
        m = i + 1
    return m


def countable_cofinal_homogeneous(F: PairColoring, ground: Iterable[int], steps: int) -> CountableResult:
    """Take the chain of initial segments of a label enumeration and refine it."""
    if steps < 1:
        raise InvalidInput("steps must be >= 1")
    labels = list(islice(iter(ground), steps))
    if len(labels) < steps:
        raise InvalidInput(f"ground enumeration produced only {len(labels)} labels, need {steps}")
    if len(set(labels)) != len(labels):
        raise InvalidInput("ground enumeration repeats a label")
    chain = prefix_chain(steps, labels)
    eh = extract_end_homogeneous(F, chain)
    cert = extract_homogeneous(F, eh)
    return CountableResult(cert, eh, tuple(labels), coverage_bound(cert.members, labels))


@dataclass(frozen=True)
class BruteResult:
    size: int
    witness: tuple
    color: int


def brute_max_homogeneous(F: PairColoring, chain: Sequence[FinSet], limit: int = 20) -> BruteResult:
    """Largest homogeneous subset of a chain by exhaustive search over all subsets.

    Ties go to the smaller color, then to the lexicographically least
    position tuple.
    """
    chain = make_chain(chain)
    n = len(chain)
    if n > limit:
        raise CapExceeded(f"chain length {n} exceeds brute-force limit {limit}")
    if n <= 1:
        return BruteResult(n, chain, 1)
    masks = [s.mask for s in chain]
    best = None
    for color in range(1, F.k + 1):
        adj = [0] * n
        for i in range(n):
            for j in range(i + 1, n):
                if F.eval_mask(masks[i], masks[j]) == color:
                    adj[i] |= 1 << j
                    adj[j] |= 1 << i
        ok = bytearray(1 << n)
        ok[0] = 1
        top_size, top = 0, []
        for mask in range(1, 1 << n):
            low = mask & -mask
            rest = mask ^ low
            if ok[rest] and rest & ~adj[low.bit_length() - 1] == 0:
                ok[mask] = 1
                size = mask.bit_count()
                if size > top_size:
                    top_size, top = size, [mask]
                elif size == top_size:
                    top.append(mask)
        if best is None or top_size > best[0]:
            lex = min(top, key=lambda m: [i for i in range(n) if m >> i & 1])
            best = (top_size, color, lex)
    size, color, mask = best
    return BruteResult(size, tuple(chain[i] for i in range(n) if mask >> i & 1), color)
