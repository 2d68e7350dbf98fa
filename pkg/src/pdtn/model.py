"""Guarded parametric timed automata: syntax, valuations and subclass checks."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Optional

RELATIONS = ("<", "<=", "=", ">=", ">")

ClockValuation = Mapping[str, Fraction]
ParamValuation = Mapping[str, int]


class ModelError(ValueError):
    """Raised when a model, valuation or name lookup is inconsistent."""


@dataclass(frozen=True)
class LinearExpr:
    """``sum(coef * param) + const`` with parameters merged and zero terms dropped."""

    terms: tuple[tuple[int, str], ...] = ()
    const: int = 0

    def __post_init__(self):
        merged: dict[str, int] = {}
        for coef, param in self.terms:
            merged[param] = merged.get(param, 0) + int(coef)
        canon = tuple((c, p) for p, c in merged.items() if c != 0)
        object.__setattr__(self, "terms", canon)
        object.__setattr__(self, "const", int(self.const))

    @classmethod
    def constant(cls, value: int) -> LinearExpr:
        return cls((), value)

    @classmethod
    def param(cls, name: str, coef: int = 1, const: int = 0) -> LinearExpr:
        return cls(((coef, name),), const)

    @property
    def params(self) -> tuple[str, ...]:
        return tuple(p for _, p in self.terms)

    def coef(self, param: str) -> int:
        for c, p in self.terms:
            if p == param:
                return c
        return 0

    def is_constant(self) -> bool:
        return not self.terms

    def evaluate(self, v: ParamValuation) -> int:
        total = self.const
        for c, p in self.terms:
            if p not in v:
                raise ModelError(f"parameter {p!r} has no value")
            total += c * v[p]
        return total

    def substitute(self, v: ParamValuation) -> LinearExpr:
        """Replace every parameter covered by ``v``; others stay symbolic."""
        const = self.const
        rest = []
        for c, p in self.terms:
            if p in v:
                const += c * v[p]
            else:
                rest.append((c, p))
        return LinearExpr(tuple(rest), const)

    def __str__(self) -> str:
        parts = []
        for c, p in self.terms:
            if c == 1:
                parts.append(p)
            elif c == -1:
                parts.append(f"-{p}")
            else:
                parts.append(f"{c}*{p}")
        if self.const or not parts:
            parts.append(str(self.const))
        return " + ".join(parts).replace("+ -", "- ")


@dataclass(frozen=True)
class Inequality:
    clock: str
    rel: str
    rhs: LinearExpr

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ModelError(f"unknown relation {self.rel!r}")

    def holds(self, value: Fraction, bound: int) -> bool:
        rel = self.rel
        if rel == "<":
            return value < bound
        if rel == "<=":
            return value <= bound
        if rel == "=":
            return value == bound
        if rel == ">=":
            return value >= bound
        return value > bound

    def __str__(self) -> str:
        return f"{self.clock} {self.rel} {self.rhs}"


@dataclass(frozen=True)
class Constraint:
    """Conjunction of inequalities; the empty conjunction is True."""

    conjuncts: tuple[Inequality, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "conjuncts", tuple(self.conjuncts))

    @property
    def is_true(self) -> bool:
        return not self.conjuncts

    def __iter__(self):
        return iter(self.conjuncts)

    def __len__(self):
        return len(self.conjuncts)

    def __str__(self) -> str:
        return " && ".join(map(str, self.conjuncts)) if self.conjuncts else "true"


TRUE = Constraint()


def ineq(clock: str, rel: str, const: int = 0, **params: int) -> Inequality:
    """Shorthand: ``ineq("x", "<=", 1, p=2)`` is ``x <= 2*p + 1``."""
    return Inequality(clock, rel, LinearExpr(tuple((c, p) for p, c in params.items()), const))


def conj(*ineqs: Inequality) -> Constraint:
    return Constraint(tuple(ineqs))


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    action: str = "a"
    guard: Constraint = TRUE
    locguard: Optional[str] = None
    resets: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "resets", frozenset(self.resets))


@dataclass(frozen=True, eq=True)
class GuardedPTA:
    """A gPTA. ``invariants`` only needs entries for non-True invariants."""

    name: str
    locations: tuple[str, ...]
    initial: str
    clocks: tuple[str, ...]
    params: tuple[str, ...] = ()
    invariants: Mapping[str, Constraint] = field(default_factory=dict)
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "locations", tuple(self.locations))
        object.__setattr__(self, "clocks", tuple(self.clocks))
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "edges", tuple(self.edges))
        inv = {loc: c for loc, c in dict(self.invariants).items() if not c.is_true}
        object.__setattr__(self, "invariants", inv)

    __hash__ = None  # invariants is a dict

    @property
    def actions(self) -> frozenset[str]:
        return frozenset(e.action for e in self.edges)

    def invariant(self, loc: str) -> Constraint:
        return self.invariants.get(loc, TRUE)

    def constraints(self) -> Iterable[Constraint]:
        yield from self.invariants.values()
        for e in self.edges:
            yield e.guard

    def inequalities(self) -> Iterable[Inequality]:
        for c in self.constraints():
            yield from c

    @property
    def has_invariants(self) -> bool:
        return bool(self.invariants)

    def max_constant(self) -> int:
        """Largest absolute constant; only meaningful once parameters are valuated."""
        return max((abs(i.rhs.const) for i in self.inequalities()), default=0)


def validate(model: GuardedPTA) -> list[str]:
    """Return one diagnostic per broken well-formedness rule (empty when fine)."""
    diags = []
    locs = set(model.locations)
    clocks = set(model.clocks)
    params = set(model.params)

    def dupes(kind, names):
        seen = set()
        for n in names:
            if n in seen:
                diags.append(f"duplicate {kind} {n!r}")
            seen.add(n)

    dupes("location", model.locations)
    dupes("clock", model.clocks)
    dupes("parameter", model.params)
    if clocks & params:
        diags.append(f"names used as both clock and parameter: {sorted(clocks & params)}")
    if model.initial not in locs:
        diags.append(f"initial location {model.initial!r} is not declared")

    def check_constraint(where, c):
        for q in c:
            if q.clock not in clocks:
                diags.append(f"{where}: undeclared clock {q.clock!r}")
            for p in q.rhs.params:
                if p not in params:
                    diags.append(f"{where}: undeclared parameter {p!r}")

    for loc, c in model.invariants.items():
        if loc not in locs:
            diags.append(f"invariant attached to undeclared location {loc!r}")
        check_constraint(f"invariant of {loc!r}", c)

    for k, e in enumerate(model.edges):
        where = f"edge {k} ({e.source} -> {e.target})"
        for role, name in (("source", e.source), ("target", e.target), ("location guard", e.locguard)):
            if name is not None and name not in locs:
                diags.append(f"{where}: {role} {name!r} is not a declared location")
        for x in sorted(e.resets):
            if x not in clocks:
                diags.append(f"{where}: reset of undeclared clock {x!r}")
        check_constraint(where, e.guard)
    return diags


def check_valid(model: GuardedPTA) -> GuardedPTA:
    diags = validate(model)
    if diags:
        raise ModelError("invalid model: " + "; ".join(diags))
    return model


@dataclass(frozen=True)
class ClassReport:
    clock_count: int
    param_count: int
    has_invariants: bool
    has_constant_terms: bool
    lu_partition: Optional[tuple[tuple[str, ...], tuple[str, ...]]]
    fully_parametric: bool

    def to_json(self) -> dict:
        lu = None
        if self.lu_partition is not None:
            lu = {"lower": list(self.lu_partition[0]), "upper": list(self.lu_partition[1])}
        return {
            "clock_count": self.clock_count,
            "param_count": self.param_count,
            "has_invariants": self.has_invariants,
            "has_constant_terms": self.has_constant_terms,
            "lu_partition": lu,
            "fully_parametric": self.fully_parametric,
        }


def _bound_roles(q: Inequality):
    """Yield (param, role) pairs forced by one inequality; role is 'L' or 'U'.

    An equality acts as both an upper and a lower bound on the clock, so any
    parameter in it is forced into both roles.
    """
    for c, p in q.rhs.terms:
        if q.rel in ("<", "<="):
            yield p, ("U" if c > 0 else "L")
        elif q.rel in (">", ">="):
            yield p, ("L" if c > 0 else "U")
        else:
            yield p, "L"
            yield p, "U"


def lu_partition(model: GuardedPTA) -> Optional[tuple[tuple[str, ...], tuple[str, ...]]]:
    roles: dict[str, set[str]] = {p: set() for p in model.params}
    for q in model.inequalities():
        for p, role in _bound_roles(q):
            roles.setdefault(p, set()).add(role)
    if any(len(r) > 1 for r in roles.values()):
        return None
    # unconstrained parameters default to the lower-bound side
    lower = tuple(p for p in model.params if roles[p] != {"U"})
    upper = tuple(p for p in model.params if roles[p] == {"U"})
    return lower, upper


def classify(model: GuardedPTA) -> ClassReport:
    check_valid(model)
    has_const = any(q.rhs.const != 0 for q in model.inequalities())
    return ClassReport(
        clock_count=len(model.clocks),
        param_count=len(model.params),
        has_invariants=model.has_invariants,
        has_constant_terms=has_const,
        lu_partition=lu_partition(model),
        fully_parametric=not has_const,
    )


def substitute_constraint(c: Constraint, v: ParamValuation) -> Constraint:
    return Constraint(tuple(Inequality(q.clock, q.rel, q.rhs.substitute(v)) for q in c))


def valuate(model: GuardedPTA, v: ParamValuation) -> GuardedPTA:
    """Replace every parameter by its value; the result has no parameters."""
    missing = [p for p in model.params if p not in v]
    if missing:
        raise ModelError(f"valuation misses parameters {missing}")
    for p, val in v.items():
        if int(val) != val or val < 0:
            raise ModelError(f"parameter {p!r} must be a non-negative integer, got {val!r}")
    return replace(
        model,
        params=(),
        invariants={loc: substitute_constraint(c, v) for loc, c in model.invariants.items()},
        edges=tuple(replace(e, guard=substitute_constraint(e.guard, v)) for e in model.edges),
    )


def eval_constraint(c: Constraint, mu: ClockValuation, v: ParamValuation | None = None) -> bool:
    v = v or {}
    for q in c:
        if q.clock not in mu:
            raise ModelError(f"clock {q.clock!r} has no value")
        if not q.holds(Fraction(mu[q.clock]), q.rhs.evaluate(v)):
            return False
    return True


def reset(mu: ClockValuation, r: Iterable[str]) -> dict[str, Fraction]:
    out = dict(mu)
    for x in r:
        if x not in out:
            raise ModelError(f"cannot reset unknown clock {x!r}")
        out[x] = Fraction(0)
    return out
