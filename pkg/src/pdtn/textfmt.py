"""Readers and writers for model files, global properties and 2CM programs.

Model files are JSON (``.pdtn.json``)::

    {"name": ..., "clocks": [...], "params": [...],
     "locations": [{"name": ..., "initial": true, "invariant": [ineq, ...]}, ...],
     "edges": [{"from": ..., "to": ..., "action": ..., "guard": [...],
                "locguard": ..., "reset": [...]}, ...]}

with ``ineq = {"clock", "rel", "terms": [{"coef", "param"}], "const"}``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Union

from .model import (
    RELATIONS,
    Constraint,
    Edge,
    GuardedPTA,
    Inequality,
    LinearExpr,
    validate,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


# --------------------------------------------------------------------------
# model files


def _expect(obj, key, kind, where):
    if key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    val = obj[key]
    if not isinstance(val, kind):
        raise ParseError(f"{where}: field {key!r} must be {kind.__name__}")
    return val


def _ineq_from_json(obj, where) -> Inequality:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: inequality must be an object")
    rel = _expect(obj, "rel", str, where)
    if rel not in RELATIONS:
        raise ParseError(f"{where}: unknown relation {rel!r}")
    terms = []
    for t in obj.get("terms", []):
        if not isinstance(t, dict) or not isinstance(t.get("coef"), int) or not isinstance(t.get("param"), str):
            raise ParseError(f"{where}: malformed term {t!r}")
        terms.append((t["coef"], t["param"]))
    const = obj.get("const", 0)
    if not isinstance(const, int) or isinstance(const, bool):
        raise ParseError(f"{where}: const must be an integer")
    return Inequality(_expect(obj, "clock", str, where), rel, LinearExpr(tuple(terms), const))


def _constraint_from_json(arr, where) -> Constraint:
    if not isinstance(arr, list):
        raise ParseError(f"{where}: constraint must be a list of inequalities")
    return Constraint(tuple(_ineq_from_json(q, f"{where}[{i}]") for i, q in enumerate(arr)))


def model_from_json(doc) -> GuardedPTA:
    if not isinstance(doc, dict):
        raise ParseError("model must be a JSON object")
    name = _expect(doc, "name", str, "model")
    clocks = _expect(doc, "clocks", list, "model")
    params = doc.get("params", [])
    locs_json = _expect(doc, "locations", list, "model")
    edges_json = doc.get("edges", [])
    if not locs_json:
        raise ParseError("model: no locations")
    locations, invariants, initials = [], {}, []
    for i, lo in enumerate(locs_json):
        where = f"locations[{i}]"
        if not isinstance(lo, dict):
            raise ParseError(f"{where}: must be an object")
        ln = _expect(lo, "name", str, where)
        locations.append(ln)
        if lo.get("initial", False):
            initials.append(ln)
        if "invariant" in lo:
            invariants[ln] = _constraint_from_json(lo["invariant"], f"{where}.invariant")
    if len(initials) != 1:
        raise ParseError(f"model: exactly one initial location required, found {len(initials)}")
    edges = []
    for k, ej in enumerate(edges_json):
        where = f"edges[{k}]"
        if not isinstance(ej, dict):
            raise ParseError(f"{where}: must be an object")
        lg = ej.get("locguard")
        if lg is not None and not isinstance(lg, str):
            raise ParseError(f"{where}: locguard must be a location name")
        resets = ej.get("reset", [])
        if not isinstance(resets, list) or not all(isinstance(x, str) for x in resets):
            raise ParseError(f"{where}: reset must be a list of clock names")
        edges.append(
            Edge(
                source=_expect(ej, "from", str, where),
                target=_expect(ej, "to", str, where),
                action=_expect(ej, "action", str, where),
                guard=_constraint_from_json(ej.get("guard", []), f"{where}.guard"),
                locguard=lg,
                resets=frozenset(resets),
            )
        )
    return GuardedPTA(
        name=name,
        locations=tuple(locations),
        initial=initials[0],
        clocks=tuple(clocks),
        params=tuple(params),
        invariants=invariants,
        edges=tuple(edges),
    )


def parse_model(text: str) -> GuardedPTA:
    """Parse and validate a model file; errors carry line/column where known."""
    if not text.strip():
        raise ParseError("empty model text", 1, 1)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    model = model_from_json(doc)
    diags = validate(model)
    if diags:
        raise ParseError("invalid model: " + "; ".join(diags))
    return model


def _ineq_to_json(q: Inequality) -> dict:
    return {
        "clock": q.clock,
        "rel": q.rel,
        "terms": [{"coef": c, "param": p} for c, p in q.rhs.terms],
        "const": q.rhs.const,
    }


def model_to_json(model: GuardedPTA) -> dict:
    locs = []
    for ln in model.locations:
        lo = {"name": ln}
        if ln == model.initial:
            lo["initial"] = True
        inv = model.invariant(ln)
        if not inv.is_true:
            lo["invariant"] = [_ineq_to_json(q) for q in inv]
        locs.append(lo)
    order = {x: i for i, x in enumerate(model.clocks)}
    edges = []
    for e in model.edges:
        ej = {"from": e.source, "to": e.target, "action": e.action}
        if not e.guard.is_true:
            ej["guard"] = [_ineq_to_json(q) for q in e.guard]
        if e.locguard is not None:
            ej["locguard"] = e.locguard
        if e.resets:
            ej["reset"] = sorted(e.resets, key=lambda x: (order.get(x, len(order)), x))
        edges.append(ej)
    return {
        "name": model.name,
        "clocks": list(model.clocks),
        "params": list(model.params),
        "locations": locs,
        "edges": edges,
    }


def serialize_model(model: GuardedPTA) -> str:
    return json.dumps(model_to_json(model), indent=2, sort_keys=True) + "\n"


# --------------------------------------------------------------------------
# global properties


@dataclass(frozen=True)
class AtLeastOne:
    loc: str


@dataclass(frozen=True)
class NoneIn:
    loc: str


@dataclass(frozen=True)
class And:
    children: tuple


@dataclass(frozen=True)
class Or:
    children: tuple


PropertyAst = Union[AtLeastOne, NoneIn, And, Or]

_TOKEN = re.compile(r"\s*(?:(#)([A-Za-z_][\w.\-]*)|(>=|=|&|\||\(|\))|(\d+)|(\S))")


def _tokenize(text: str):
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(1):
            toks.append(("loc", m.group(2), m.start(1)))
        elif m.group(3):
            toks.append((m.group(3), m.group(3), m.start(3)))
        elif m.group(4):
            toks.append(("int", int(m.group(4)), m.start(4)))
        else:
            raise ParseError(f"unexpected character {m.group(5)!r}", 1, m.start(5) + 1)
        pos = m.end()
    return toks


def parse_property(text: str) -> PropertyAst:
    """Parse ``#l >= 1`` / ``#l = 0`` atoms joined by ``&`` (tighter) and ``|``."""
    toks = _tokenize(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take(kind):
        nonlocal pos
        t = peek()
        if t is None or t[0] != kind:
            col = t[2] + 1 if t else len(text) + 1
            found = repr(t[1]) if t else "end of input"
            raise ParseError(f"expected {kind!r}, found {found}", 1, col)
        pos += 1
        return t

    def atom():
        t = peek()
        if t is not None and t[0] == "(":
            take("(")
            node = disjunction()
            take(")")
            return node
        loc = take("loc")[1]
        t = peek()
        if t is None or t[0] not in (">=", "="):
            raise ParseError(f"atom on #{loc} needs '>= 1' or '= 0'", 1, t[2] + 1 if t else len(text) + 1)
        rel = take(t[0])[0]
        num = take("int")
        if rel == ">=" and num[1] == 1:
            return AtLeastOne(loc)
        if rel == "=" and num[1] == 0:
            return NoneIn(loc)
        raise ParseError(f"unsupported count atom '#{loc} {rel} {num[1]}' (only >= 1 and = 0)", 1, num[2] + 1)

    def conjunction():
        kids = [atom()]
        while peek() is not None and peek()[0] == "&":
            take("&")
            kids.append(atom())
        return kids[0] if len(kids) == 1 else And(tuple(kids))

    def disjunction():
        kids = [conjunction()]
        while peek() is not None and peek()[0] == "|":
            take("|")
            kids.append(conjunction())
        return kids[0] if len(kids) == 1 else Or(tuple(kids))

    if not toks:
        raise ParseError("empty property", 1, 1)
    node = disjunction()
    if pos != len(toks):
        raise ParseError(f"trailing input {toks[pos][1]!r}", 1, toks[pos][2] + 1)
    return node


def format_property(phi: PropertyAst) -> str:
    if isinstance(phi, AtLeastOne):
        return f"#{phi.loc} >= 1"
    if isinstance(phi, NoneIn):
        return f"#{phi.loc} = 0"
    if isinstance(phi, And):
        return " & ".join(f"({format_property(c)})" if isinstance(c, Or) else format_property(c) for c in phi.children)
    return " | ".join(format_property(c) for c in phi.children)


def property_locations(phi: PropertyAst) -> set[str]:
    if isinstance(phi, (AtLeastOne, NoneIn)):
        return {phi.loc}
    out = set()
    for c in phi.children:
        out |= property_locations(c)
    return out


# --------------------------------------------------------------------------
# 2-counter machines


@dataclass(frozen=True)
class Inc:
    counter: int
    next: str


@dataclass(frozen=True)
class ZDec:
    counter: int
    next_nonzero: str
    next_zero: str


@dataclass(frozen=True)
class MachineProgram:
    states: tuple[str, ...]
    initial: str
    halt: str
    steps: dict

    __hash__ = None


_NAME = re.compile(r"^[A-Za-z_][\w]*$")


def parse_machine(text: str) -> MachineProgram:
    """Parse the line format: ``state N``, ``init N``, ``halt N``,
    ``inc L FROM TO``, ``zdec L FROM TO_NONZERO TO_ZERO``.

    ``;`` also separates statements. Without ``state`` lines the state set is
    whatever the other statements mention; without ``init`` the first
    mentioned state is initial.
    """
    declared: list[str] = []
    mentioned: list[str] = []
    steps: dict = {}
    init = halt = None
    where: dict[str, int] = {}

    def note(name, lineno):
        if not _NAME.match(name):
            raise ParseError(f"bad state name {name!r}", lineno, 1)
        if name not in mentioned:
            mentioned.append(name)
            where[name] = lineno

    def counter(tok, lineno):
        if tok not in ("1", "2"):
            raise ParseError(f"counter must be 1 or 2, got {tok!r}", lineno, 1)
        return int(tok)

    statements = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        for part in raw.split("#", 1)[0].split(";"):
            if part.strip():
                statements.append((lineno, part.split()))

    for lineno, words in statements:
        kw, args = words[0], words[1:]
        arity = {"state": 1, "init": 1, "halt": 1, "inc": 3, "zdec": 4}
        if kw not in arity:
            raise ParseError(f"unknown keyword {kw!r}", lineno, 1)
        if len(args) != arity[kw]:
            raise ParseError(f"{kw} takes {arity[kw]} arguments, got {len(args)}", lineno, 1)
        if kw == "state":
            note(args[0], lineno)
            if args[0] in declared:
                raise ParseError(f"state {args[0]!r} declared twice", lineno, 1)
            declared.append(args[0])
            continue
        if kw in ("init", "halt"):
            note(args[0], lineno)
            if (init if kw == "init" else halt) is not None:
                raise ParseError(f"second {kw} statement", lineno, 1)
            if kw == "init":
                init = args[0]
            else:
                halt = args[0]
            continue
        c = counter(args[0], lineno)
        for name in args[1:]:
            note(name, lineno)
        src = args[1]
        if src in steps:
            raise ParseError(f"state {src!r} has more than one step (machine must be deterministic)", lineno, 1)
        steps[src] = Inc(c, args[2]) if kw == "inc" else ZDec(c, args[2], args[3])

    if not mentioned:
        raise ParseError("empty machine", 1, 1)
    if halt is None:
        raise ParseError("no halt state", 1, 1)
    if declared:
        for name in mentioned:
            if name not in declared:
                raise ParseError(f"undeclared state {name!r}", where[name], 1)
        states = tuple(declared)
    else:
        states = tuple(mentioned)
    if init is None:
        init = states[0]
    if halt in steps:
        raise ParseError(f"halt state {halt!r} must not have a step")
    for s in states:
        if s != halt and s not in steps:
            raise ParseError(f"state {s!r} has no step")
    return MachineProgram(states, init, halt, steps)


def format_machine(m: MachineProgram) -> str:
    lines = [f"state {s}" for s in m.states]
    lines += [f"init {m.initial}", f"halt {m.halt}"]
    for s in m.states:
        st = m.steps.get(s)
        if isinstance(st, Inc):
            lines.append(f"inc {st.counter} {s} {st.next}")
        elif isinstance(st, ZDec):
            lines.append(f"zdec {st.counter} {s} {st.next_nonzero} {st.next_zero}")
    return "\n".join(lines) + "\n"
