"""The adversarial construction of a cofinal family with no cofinal homogeneous subset.

For every label alpha we grow s_alpha downward: starting from a_alpha + {alpha},
visit the elements below the current position in decreasing order; at
each visited beta pick two fresh members c, d of the registered family
H_beta, absorb them, and record F(c, s_alpha) = 1 and F(d, s_alpha) = 2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .coloring import ConstraintColoring, PairColoring
from .errors import ConstraintConflict, InvalidInput, VerificationFailure
from .lattice import FinSet, finset_from_json, set_key, subsets


@dataclass(frozen=True)
class Choice:
    position: int
    beta: int
    c: FinSet | None
    d: FinSet | None
    available: int  # members of H_beta not chosen earlier in this build step

    @property
    def ok(self) -> bool:
        return self.c is not None

    def to_json(self):
        out = {"position": self.position, "beta": self.beta, "ok": self.ok, "available": self.available}
        if self.ok:
            out["c"], out["d"] = self.c.to_json(), self.d.to_json()
        return out


@dataclass(frozen=True)
class LaverState:
    ground_size: int
    a_enum: Mapping
    mh_registry: Mapping
    built: Mapping = field(default_factory=dict)
    constraints: Mapping = field(default_factory=dict)
    choice_log: Mapping = field(default_factory=dict)

    def registry_json(self):
        return {
            "ground_size": self.ground_size,
            "a": [[al, self.a_enum[al].to_json()] for al in sorted(self.a_enum)],
            "mh": [[al, {"M": M.to_json(), "H": [h.to_json() for h in H]}]
                   for al, (M, H) in sorted(self.mh_registry.items())],
        }

    def to_json(self):
        out = self.registry_json()
        out["built"] = [[al, s.to_json()] for al, s in sorted(self.built.items())]
        out["constraints"] = [[x.to_json(), s.to_json(), c]
                              for (x, s), c in sorted(self.constraints.items(),
                                                      key=lambda kv: (kv[0][1].key(), kv[0][0].key()))]
        out["choice_log"] = [[al, [ch.to_json() for ch in log]] for al, log in sorted(self.choice_log.items())]
        return out


def _check_registry(ground_size, a_enum, mh):
    if ground_size < 1:
        raise InvalidInput("ground_size must be >= 1")
    for al, a in a_enum.items():
        if not 0 <= al < ground_size:
            raise InvalidInput(f"a-enumeration index {al} outside 0..{ground_size - 1}")
        if a and max(a) >= al:
            raise InvalidInput(f"a_{al} = {a} is not a subset of {{0..{al - 1}}}")
    for al, (M, H) in mh.items():
        if not 0 <= al < ground_size:
            raise InvalidInput(f"registry index {al} outside 0..{ground_size - 1}")
        if M and max(M) >= al:
            raise InvalidInput(f"M_{al} = {M} is not a subset of {{0..{al - 1}}}")
        for h in H:
            if not h <= M:
                raise InvalidInput(f"member {h} of H_{al} is not a subset of M_{al} = {M}")


def laver_build(ground_size: int, a_enum: Mapping, mh_registry: Mapping) -> LaverState:
    a_enum = {al: FinSet(a) for al, a in a_enum.items()}
    mh = {al: (FinSet(M), tuple(sorted({FinSet(h) for h in H}, key=set_key)))
          for al, (M, H) in mh_registry.items()}
    _check_registry(ground_size, a_enum, mh)
    built, constraints, log = {}, {}, {}
    for alpha in range(ground_size):
        b = a_enum.get(alpha, FinSet()) | {alpha}
        chosen: set = set()
        steps = []
        pos, beta = 0, alpha
        while True:
            family = mh.get(beta, (FinSet(), ()))[1]
            fresh = [h for h in family if h not in chosen]
            if len(fresh) >= 2:
                c, d = fresh[0], fresh[1]
                chosen.update((c, d))
                b = b | c | d
                steps.append(Choice(pos, beta, c, d, len(fresh)))
            else:
                steps.append(Choice(pos, beta, None, None, len(fresh)))
            below = [x for x in b if x < beta]
            if not below:
                break
            beta = max(below)
            pos += 1
        built[alpha] = b
        for ch in steps:
            if ch.ok:
                for x, color in ((ch.c, 1), (ch.d, 2)):
                    key = (x, b)
                    if key in constraints and constraints[key] != color:
                        raise ConstraintConflict(f"pair {key} colored {constraints[key]} and {color}")
                    constraints[key] = color
        log[alpha] = tuple(steps)
    return LaverState(ground_size, a_enum, mh, built, constraints, log)


def constraint_conflicts(rows) -> list:
    """Pairs that appear in ``rows`` with two different colors."""
    seen, bad = {}, []
    for x, s, c in rows:
        key = (FinSet(x), FinSet(s))
        if key in seen and seen[key] != c:
            bad.append((key, seen[key], c))
        seen.setdefault(key, c)
    return bad


def laver_complete(state: LaverState, default: int = 1, extra=()) -> PairColoring:
    """Extend the recorded constraints to a total 2-coloring with a default color.

    ``extra`` rows (x, s, color) are merged in first; any pair receiving two
    colors raises :class:`ConstraintConflict`.
    """
    rows = [(x, s, c) for (x, s), c in state.constraints.items()] + list(extra)
    bad = constraint_conflicts(rows)
    if bad:
        key, c1, c2 = bad[0]
        raise ConstraintConflict(f"pair ({key[0]}, {key[1]}) colored both {c1} and {c2}")
    return ConstraintColoring(2, {(FinSet(x), FinSet(s)): c for x, s, c in rows}, default)


@dataclass(frozen=True)
class NonHomogeneityWitness:
    beta: int
    alpha: int
    s: FinSet
    c: FinSet
    d: FinSet
    colors: tuple = (1, 2)

    def to_json(self):
        return {"beta": self.beta, "alpha": self.alpha, "s": self.s.to_json(),
                "c": self.c.to_json(), "d": self.d.to_json(), "colors": list(self.colors)}


def laver_verify(state: LaverState, F: PairColoring, beta: int) -> list:
    """Witnesses that F is not homogeneous on any family registered at beta."""
    if beta not in state.mh_registry:
        raise InvalidInput(f"beta = {beta} is not registered")
    family = set(state.mh_registry[beta][1])
    out = []
    for alpha in sorted(state.built):
        s = state.built[alpha]
        if beta not in s:
            continue
        ch = next((c for c in state.choice_log[alpha] if c.beta == beta), None)
        if ch is None or not ch.ok:
            continue
        colors = (F.eval(ch.c, s), F.eval(ch.d, s))
        if colors != (1, 2) or not {ch.c, ch.d} <= family:
            raise VerificationFailure(f"witness at alpha={alpha}, beta={beta} does not re-verify: colors {colors}")
        out.append(NonHomogeneityWitness(beta, alpha, s, ch.c, ch.d, colors))
    return out


def richness_violations(state: LaverState) -> list:
    """Choice positions where the family still had two fresh members but no choice was made.

    Also flags the weaker form: |H_beta| >= 2(i + 1) at position i without success.
    """
    bad = []
    for alpha, log in state.choice_log.items():
        for ch in log:
            size = len(state.mh_registry.get(ch.beta, (None, ()))[1])
            if not ch.ok and (ch.available >= 2 or size >= 2 * (ch.position + 1)):
                bad.append((alpha, ch))
    return bad


def greedy_enumeration(ground_size: int, universe, start: int = 0) -> dict:
    """Assign to each alpha the least unused subset of ``universe`` lying below alpha.

    Order is (size, elements). Indices with no remaining admissible subset
    are left out.
    """
    source = subsets(universe)
    deferred = []  # pulled but not yet admissible, still in enumeration order
    out = {}
    for al in range(start, ground_size):
        pick = next((x for x in deferred if not x or max(x) < al), None)
        if pick is not None:
            deferred.remove(pick)
        else:
            for x in source:
                if not x or max(x) < al:
                    pick = x
                    break
                deferred.append(x)
        if pick is None:
            continue
        out[al] = pick
    return out


def full_subset_registry(ground_size: int, universe) -> dict:
    """M_alpha from :func:`greedy_enumeration`, each with H_alpha = all subsets of M_alpha."""
    return {al: (M, tuple(subsets(M))) for al, M in greedy_enumeration(ground_size, universe).items()}


def registry_from_json(obj, path="registry"):
    if not isinstance(obj, dict):
        raise InvalidInput("registry must be an object", path)
    n = obj.get("ground_size")
    if isinstance(n, bool) or not isinstance(n, int):
        raise InvalidInput("ground_size must be an integer", f"{path}.ground_size")
    a_enum, mh = {}, {}
    for i, row in enumerate(obj.get("a", [])):
        p = f"{path}.a[{i}]"
        if not (isinstance(row, list) and len(row) == 2 and isinstance(row[0], int)):
            raise InvalidInput("entry must be [alpha, set]", p)
        if row[0] in a_enum:
            raise InvalidInput(f"duplicate alpha {row[0]}", p)
        a_enum[row[0]] = finset_from_json(row[1], p + "[1]")
    for i, row in enumerate(obj.get("mh", [])):
        p = f"{path}.mh[{i}]"
        if not (isinstance(row, list) and len(row) == 2 and isinstance(row[0], int) and isinstance(row[1], dict)):
            raise InvalidInput('entry must be [alpha, {"M": [...], "H": [[...], ...]}]', p)
        if row[0] in mh:
            raise InvalidInput(f"duplicate alpha {row[0]}", p)
        M = finset_from_json(row[1].get("M", []), p + ".M")
        H = tuple(finset_from_json(h, f"{p}.H[{j}]") for j, h in enumerate(row[1].get("H", [])))
        mh[row[0]] = (M, H)
    _check_registry(n, a_enum, {al: (M, H) for al, (M, H) in mh.items()})
    return n, a_enum, mh


def state_from_json(obj, path="state") -> LaverState:
    """Rebuild a state from its registry; recorded build data must match the rebuild."""
    n, a_enum, mh = registry_from_json(obj, path)
    state = laver_build(n, a_enum, mh)
    if "built" in obj and state.to_json()["built"] != obj["built"]:
        raise InvalidInput("recorded built sets do not match a rebuild of the registry", f"{path}.built")
    if "constraints" in obj and state.to_json()["constraints"] != obj["constraints"]:
        raise InvalidInput("recorded constraints do not match a rebuild of the registry", f"{path}.constraints")
    return state
