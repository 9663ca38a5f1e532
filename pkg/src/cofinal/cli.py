"""cofinal: certificates for end-homogeneous, homogeneous and cofinal constructions over finite sets.

Every subcommand reads one JSON document (a path, ``-`` for stdin, or an
inline object starting with ``{``), writes one JSON document with sorted keys,
and exits 0 on success, 1 on a verified negative result, 2 on bad input and
3 when a resource cap is hit. An output document can be fed back to the
matching verify or extend command.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from .coloring import PartialColoring, coloring_from_json
from .construction import (DEFAULT_PAIR_CAP, Approximation, Window, build_approximation,
                           extend_approximation, is_good_bounded, lemma22_search, lemma23_search,
                           verify_approximation)
from .errors import (CapExceeded, ConstraintConflict, ConstructionStuck, InvalidInput,
                     VerificationFailure, WitnessDisagreement)
from .lattice import AnchoredPair, FinPoset, finset_from_json
from .laver import (LaverState, full_subset_registry, greedy_enumeration, laver_build, laver_complete,
                    laver_verify, richness_violations, state_from_json)
from .oracle import GeneratedPoset, char_width, char_width_trend, sweep_colorings
from .ramsey import (EndHomogeneousCertificate, brute_max_homogeneous, chain_from_json,
                     countable_cofinal_homogeneous, extract_end_homogeneous, extract_homogeneous,
                     prefix_chain, size_lower_bound, verify_end_homogeneous)

SCHEMA = "cofinal.cli/1"
EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3
ORACLE_LIMIT = 14


# --- parsing ---------------------------------------------------------------------------------

def _int_field(v, path, lo=0):
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise InvalidInput(f"expected an integer >= {lo}, got {v!r}", path)
    return v


def _labels(v, path):
    if not isinstance(v, list):
        raise InvalidInput("expected an array of labels", path)
    out = [_int_field(x, f"{path}[{i}]") for i, x in enumerate(v)]
    if len(set(out)) != len(out):
        raise InvalidInput("labels repeat", path)
    return tuple(out)


def _laver(obj, path):
    if obj.get("registry") == "full_subsets":
        n = _int_field(obj.get("ground_size"), f"{path}.ground_size", 1)
        universe = _labels(obj.get("universe", []), f"{path}.universe")
        return laver_build(n, greedy_enumeration(n, range(n)), full_subset_registry(n, universe))
    return state_from_json(obj, path)


def _poset(obj, path):
    if isinstance(obj, dict) and "generator" in obj:
        return GeneratedPoset.from_json(obj, path)
    return FinPoset.from_json(obj, path)


def _interior(v, path):
    if not isinstance(v, list):
        raise InvalidInput("interior must be an array of sets", path)
    return [finset_from_json(x, f"{path}[{i}]") for i, x in enumerate(v)]


FIELDS = {
    "coloring": coloring_from_json,
    "chain": chain_from_json,
    "N": lambda v, p: _int_field(v, p, 1),
    "steps": lambda v, p: _int_field(v, p, 1),
    "labels": _labels,
    "certificate": EndHomogeneousCertificate.from_json,
    "pair": AnchoredPair.from_json,
    "p": AnchoredPair.from_json,
    "q": AnchoredPair.from_json,
    "f": PartialColoring.from_json,
    "approximation": Approximation.from_json,
    "xi": lambda v, p: _int_field(v, p),
    "state": _laver,
    "poset": _poset,
    "interior": _interior,
}

# chained outputs carry these result fields forward
CARRIED = ("certificate", "approximation", "state")


def _single(obj):
    """Parse a bare domain object, or return None when obj is a field document."""
    keys = set(obj)
    if "ground_size" in keys:
        return _laver(obj, "state")
    if keys & {"rule", "table", "constraints"}:
        return coloring_from_json(obj)
    if keys == {"base", "map"} or keys == {"base"}:
        return PartialColoring.from_json(obj)
    if keys == {"part", "ground"}:
        return AnchoredPair.from_json(obj)
    if "generator" in keys:
        return GeneratedPoset.from_json(obj)
    if "elements" in keys:
        return FinPoset.from_json(obj)
    if "ground_prefix" in keys:
        return Approximation.from_json(obj)
    return None


def parse_document(obj):
    if not isinstance(obj, dict):
        raise InvalidInput("input must be a JSON object")
    if "command" in obj and "schema" in obj:
        if "error" in obj:
            raise InvalidInput("input is an error document", "error")
        merged = dict(obj.get("input") or {})
        result = obj.get("result") or {}
        for key in CARRIED:
            if key in result:
                merged[key] = result[key]
        obj = merged
    single = _single(obj)
    if single is not None:
        return single
    out = {}
    for key, value in obj.items():
        if key not in FIELDS:
            raise InvalidInput(f"unknown field {key!r}", key)
        out[key] = FIELDS[key](value, key)
    return out


def parse_spec(text: str):
    """JSON text to validated domain objects (a bare object or a dict of named fields)."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise InvalidInput(f"malformed JSON: {e.msg} at line {e.lineno} column {e.colno}") from None
    return parse_document(obj)


def serialize(obj):
    if isinstance(obj, dict):
        return {k: serialize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [serialize(v) for v in obj]
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return obj


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# --- commands --------------------------------------------------------------------------------

@dataclass
class CommandSpec:
    name: str
    input: str | None = None
    output: str | None = None
    figure: str | None = None
    flags: dict = field(default_factory=dict)


@dataclass
class Outcome:
    result: dict
    code: int = EXIT_OK
    figure: tuple | None = None


def _need(doc, *keys):
    if not isinstance(doc, dict):
        raise InvalidInput(f"expected a document with fields {', '.join(keys)}")
    for k in keys:
        if k not in doc:
            raise InvalidInput(f"missing field {k!r}", k)
    return [doc[k] for k in keys]


def _window(flags):
    return Window(flags["width"], flags["reserve"])


def _chain(doc):
    if "chain" in doc:
        return doc["chain"]
    if "N" in doc:
        return prefix_chain(doc["N"])
    raise InvalidInput("need a 'chain' or 'N' field")


def cmd_eh_extract(doc, flags):
    F, = _need(doc, "coloring")
    chain = _chain(doc)
    cert = extract_end_homogeneous(F, chain)
    bound = size_lower_bound(len(chain), F.k)
    positions = [chain.index(s) for s in cert.subsequence]
    result = {"certificate": cert.to_json(), "chain_length": len(chain), "positions": positions,
              "lower_bound": bound, "meets_bound": len(cert.subsequence) >= bound}
    code = EXIT_OK if cert.verified and result["meets_bound"] else EXIT_NEGATIVE
    return Outcome(result, code, ("end_colors", len(chain), positions, list(cert.end_colors)))


def cmd_homog(doc, flags):
    F, = _need(doc, "coloring")
    chain = None
    if "certificate" in doc:
        eh = verify_end_homogeneous(F, doc["certificate"])
        if not eh.verified:
            i, j, c = eh.violations[0]
            return Outcome({"certificate": eh.to_json(), "error": f"pair ({i}, {j}) has color {c}"}, EXIT_NEGATIVE)
    else:
        chain = _chain(doc)
        eh = extract_end_homogeneous(F, chain)
    hom = extract_homogeneous(F, eh)
    result = {"homogeneous": hom.to_json(), "end_homogeneous": eh.to_json()}
    if chain is not None and len(chain) <= ORACLE_LIMIT:
        brute = brute_max_homogeneous(F, chain)
        result["oracle"] = {"size": brute.size, "color": brute.color,
                            "witness": [s.to_json() for s in brute.witness],
                            "agrees": len(hom.members) <= brute.size}
    return Outcome(result, EXIT_OK if hom.verified else EXIT_NEGATIVE)


def cmd_countable(doc, flags):
    F, n = _need(doc, "coloring", "steps")
    ground = doc.get("labels") or range(n)
    res = countable_cofinal_homogeneous(F, ground, n)
    return Outcome(res.to_json(), EXIT_OK if res.certificate.verified else EXIT_NEGATIVE)


def cmd_good_check(doc, flags):
    F, p = _need(doc, "coloring", "pair")
    f = doc.get("f") or PartialColoring(p.part)
    v = is_good_bounded(F, p, f, _window(flags), pair_cap=flags["cap"])
    return Outcome({"verdict": v.to_json()}, EXIT_OK if v.good else EXIT_NEGATIVE)


def _lemma_outcome(res):
    if res is None:
        return Outcome({"found": False}, EXIT_NEGATIVE)
    return Outcome({"found": True, "witness": res.to_json()})


def _lemma_knobs(flags):
    return {"enum_cap": flags["enum_cap"], "pair_cap": flags["cap"], "budget": flags["budget"]}


def cmd_lemma22(doc, flags):
    F, q = _need(doc, "coloring", "q")
    return _lemma_outcome(lemma22_search(F, q, _window(flags), **_lemma_knobs(flags)))


def cmd_lemma23(doc, flags):
    F, p, f, q = _need(doc, "coloring", "p", "f", "q")
    return _lemma_outcome(lemma23_search(F, p, f, q, _window(flags), **_lemma_knobs(flags)))


def _stuck(e: ConstructionStuck):
    return Outcome({"stuck": {"step": e.step, "message": str(e), "log": [s.to_json() for s in e.log]}},
                   EXIT_NEGATIVE)


def cmd_approx_build(doc, flags):
    F, = _need(doc, "coloring")
    try:
        ap = build_approximation(F, _window(flags), flags["depth"], **_lemma_knobs(flags))
    except ConstructionStuck as e:
        return _stuck(e)
    return Outcome({"approximation": ap.to_json()})


def cmd_approx_extend(doc, flags):
    F, ap = _need(doc, "coloring", "approximation")
    xi = flags["xi"] if flags["xi"] is not None else doc.get("xi")
    if xi is None:
        raise InvalidInput("need a label to add: field 'xi' or --xi")
    try:
        new = extend_approximation(F, ap, xi, _window(flags), flags["depth"], **_lemma_knobs(flags))
    except ConstructionStuck as e:
        return _stuck(e)
    return Outcome({"approximation": new.to_json()})


def cmd_approx_verify(doc, flags):
    F, ap = _need(doc, "coloring", "approximation")
    rep = verify_approximation(F, ap, _window(flags), pair_cap=flags["cap"])
    return Outcome({"report": rep.to_json()}, EXIT_OK if rep.ok else EXIT_NEGATIVE)


def _state(doc) -> LaverState:
    if isinstance(doc, LaverState):
        return doc
    st, = _need(doc, "state")
    return st


def cmd_laver_build(doc, flags):
    try:
        st = _state(doc)
    except ConstraintConflict as e:
        return Outcome({"conflict": str(e)}, EXIT_NEGATIVE)
    rich = richness_violations(st)
    result = {"state": st.to_json(), "constraint_count": len(st.constraints),
              "richness_violations": [[al, ch.to_json()] for al, ch in rich]}
    return Outcome(result, EXIT_OK if not rich else EXIT_NEGATIVE)


def cmd_laver_verify(doc, flags):
    st = _state(doc)
    if flags["beta"] is None:
        raise InvalidInput("--beta is required")
    F = laver_complete(st, flags["default_color"])
    try:
        wits = laver_verify(st, F, flags["beta"])
    except VerificationFailure as e:
        return Outcome({"error": str(e)}, EXIT_NEGATIVE)
    return Outcome({"beta": flags["beta"], "witnesses": [w.to_json() for w in wits]},
                   EXIT_OK if wits else EXIT_NEGATIVE)


def cmd_sweep(doc, flags):
    interior = doc.get("interior") if isinstance(doc, dict) else None
    mode = "sampled" if flags["samples"] else "exhaustive"
    rep = sweep_colorings(flags["width"], flags["k"], mode, flags["samples"], flags["seed"], interior,
                          flags["min_chain"], flags["jobs"])
    out = rep.to_json()
    return Outcome({"report": out}, figure=("sweep", out))


def cmd_char_width(doc, flags):
    S = doc if isinstance(doc, (FinPoset, GeneratedPoset)) else _need(doc, "poset")[0]
    fig = None
    if isinstance(S, GeneratedPoset):
        P, levels = S.prefix()
        res = char_width(P, flags["bound"], levels, exact=flags["exact"])
        rows = char_width_trend(S, range(1, S.depth + 1), flags["bound"], exact=flags["exact"])
        fig = ("trend", rows, flags["bound"])
    else:
        res = char_width(S, flags["bound"], exact=flags["exact"])
    result = {"char_width": res.to_json()}
    if fig:
        result["trend"] = rows
    return Outcome(result, EXIT_OK if res.passed else EXIT_NEGATIVE, fig)


COMMANDS = {
    "eh-extract": cmd_eh_extract,
    "homog": cmd_homog,
    "countable-cofinal": cmd_countable,
    "good-check": cmd_good_check,
    "lemma22": cmd_lemma22,
    "lemma23": cmd_lemma23,
    "approx-build": cmd_approx_build,
    "approx-extend": cmd_approx_extend,
    "approx-verify": cmd_approx_verify,
    "laver-build": cmd_laver_build,
    "laver-verify": cmd_laver_verify,
    "sweep": cmd_sweep,
    "char-width": cmd_char_width,
}
INPUT_OPTIONAL = {"sweep"}
FIGURES = {"eh-extract", "sweep", "char-width"}
# flags that change only speed, never results, stay out of the output
UNRECORDED = {"jobs"}


def _read(source: str | None):
    if source is None:
        return None
    if source.lstrip().startswith("{"):
        return source
    if source == "-":
        return sys.stdin.read()
    try:
        with open(source, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise InvalidInput(f"cannot read {source}: {e.strerror}") from None


def _render(fig, path):
    from . import report
    kind, *data = fig
    if kind == "sweep":
        report.sweep_figure(data[0], path)
    elif kind == "trend":
        report.trend_figure(data[0], data[1], path)
    else:
        report.end_colors_figure(*data, path)


def run(cmd: CommandSpec) -> tuple:
    """Execute a command; returns (exit code, output text). Figures are written as a side effect."""
    recorded = {k: v for k, v in sorted(cmd.flags.items()) if k not in UNRECORDED}
    doc_out = {"schema": SCHEMA, "command": cmd.name, "flags": recorded}
    try:
        text = _read(cmd.input)
        if text is None and cmd.name not in INPUT_OPTIONAL:
            raise InvalidInput("an input document is required")
        doc = parse_spec(text) if text is not None else {}
        doc_out["input"] = serialize(doc)
        out = COMMANDS[cmd.name](doc, cmd.flags)
        doc_out["result"] = out.result
        doc_out["status"] = "ok" if out.code == EXIT_OK else "negative"
        if cmd.figure and out.figure:
            _render(out.figure, cmd.figure)
        return out.code, dumps(doc_out)
    except CapExceeded as e:
        code, kind, err = EXIT_CAP, "cap", e
    except (InvalidInput, ConstraintConflict) as e:
        code, kind, err = EXIT_INPUT, "input", e
    except (ConstructionStuck, VerificationFailure, WitnessDisagreement) as e:
        code, kind, err = EXIT_NEGATIVE, "negative", e
    doc_out.pop("result", None)
    doc_out["status"] = "error"
    doc_out["error"] = {"kind": kind, "type": type(err).__name__, "message": str(err),
                        "path": getattr(err, "path", None)}
    return code, dumps(doc_out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cofinal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_, *groups):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("input", nargs="?" if name in INPUT_OPTIONAL else None,
                        help='JSON input: a path, "-" for stdin, or an inline object')
        sp.add_argument("-o", "--output", help="write the JSON document here (default: stdout)")
        if name in FIGURES:
            sp.add_argument("--figure", help="also render a PNG figure to this path")
        for g in groups:
            g(sp)
        return sp

    def window(sp):
        sp.add_argument("--width", type=int, default=12, help="label window {0..w-1} (default 12)")
        sp.add_argument("--reserve", type=int, default=1, help="labels left free by quantified sets (default 1)")
        sp.add_argument("--cap", type=int, default=DEFAULT_PAIR_CAP,
                        help=f"quantified-pair cap per goodness check (default {DEFAULT_PAIR_CAP})")

    def search(sp):
        sp.add_argument("--enum-cap", type=int, default=12, help="largest |b| searched (default 12)")
        sp.add_argument("--budget", type=int, default=64, help="goodness checks per search (default 64)")

    def depth(sp):
        sp.add_argument("--depth", type=int, default=4, help="construction steps (default 4)")

    add("eh-extract", "greedy end-homogeneous extraction along a chain")
    add("homog", "homogeneous set from an end-homogeneous run, with exhaustive oracle")
    add("countable-cofinal", "cofinal homogeneous set along an enumeration")
    add("good-check", "decide bounded goodness of a pair for a partial coloring", window)
    add("lemma22", "search for a good (c, C) above q", window, search)
    add("lemma23", "search for a good (c, C) above q respecting f", window, search)
    add("approx-build", "build an approximation (A, G, H)", window, search, depth)
    ext = add("approx-extend", "extend an approximation by one label", window, search, depth)
    ext.add_argument("--xi", type=int, default=None, help="label to add (default: the input's 'xi')")
    add("approx-verify", "check the four approximation clauses", window)
    add("laver-build", "run the adversarial construction on a registry")
    lv = add("laver-verify", "non-homogeneity witnesses at a registered beta")
    lv.add_argument("--beta", type=int, default=None, help="registered index to check (required)")
    lv.add_argument("--default-color", type=int, default=1, choices=(1, 2),
                    help="color of unconstrained pairs (default 1)")
    sw = add("sweep", "cofinal-homogeneous search over all or sampled colorings of a window")
    sw.add_argument("--width", type=int, default=2, help="window width (default 2)")
    sw.add_argument("--k", type=int, default=2, help="number of colors (default 2)")
    sw.add_argument("--samples", type=int, default=0, help="sample this many colorings; 0 = exhaustive (default 0)")
    sw.add_argument("--seed", type=int, default=0, help="seed for sampled mode (default 0)")
    sw.add_argument("--min-chain", type=int, default=1, help="required chain length in H (default 1)")
    sw.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    cw = add("char-width", "finite-character diagnostic for a poset or generated prefix")
    cw.add_argument("--bound", type=int, default=0, help="pass when max_preds <= bound (default 0)")
    cw.add_argument("--exact", action="store_true", help="exact minimization (at most 16 elements)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "input", "output", "figure")}
    cmd = CommandSpec(args.command, args.input, args.output, getattr(args, "figure", None), flags)
    code, text = run(cmd)
    if cmd.output:
        with open(cmd.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if code in (EXIT_INPUT, EXIT_CAP):
        print(f"cofinal: {json.loads(text)['error']['message']}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
