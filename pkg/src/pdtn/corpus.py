"""Seeded random model generators for differential and property tests."""

from __future__ import annotations

import random
from typing import Optional

from .model import Constraint, Edge, GuardedPTA, Inequality, LinearExpr, RELATIONS

UPPER_RELS = ("<", "<=")
LOWER_RELS = (">", ">=")


def _skeleton(rng: random.Random, n_locs: int, max_edges: int, locguards: bool):
    locs = tuple(f"l{i}" for i in range(n_locs))
    shape = []
    for _ in range(rng.randint(1, max_edges)):
        src = rng.choice(locs)
        dst = rng.choice(locs)
        lg = rng.choice(locs) if locguards and rng.random() < 0.35 else None
        shape.append((src, dst, lg))
    return locs, shape


def _assemble(name, locs, clocks, params, invariants, shape, guards, rng) -> GuardedPTA:
    edges = []
    for (src, dst, lg), g in zip(shape, guards):
        resets = frozenset(x for x in clocks if rng.random() < 0.45)
        edges.append(Edge(src, dst, f"a{len(edges)}", g, lg, resets))
    return GuardedPTA(name, locs, locs[0], clocks, params, invariants, tuple(edges))


def random_valuated(
    rng: random.Random,
    max_locs: int = 4,
    max_const: int = 3,
    invariants: bool = True,
    locguards: bool = True,
    n_clocks: int = 1,
) -> GuardedPTA:
    """Parameter-free model; invariants (when enabled) are upper bounds."""
    n_locs = rng.randint(2, max_locs)
    locs, shape = _skeleton(rng, n_locs, 2 * n_locs, locguards)
    clocks = tuple(f"x{i}" if n_clocks > 1 else "x" for i in range(n_clocks))

    def const_ineq(rels):
        return Inequality(rng.choice(clocks), rng.choice(rels), LinearExpr.constant(rng.randint(0, max_const)))

    guards = [Constraint(tuple(const_ineq(RELATIONS) for _ in range(rng.randint(0, 2)))) for _ in shape]
    inv = {}
    if invariants:
        for loc in locs:
            if rng.random() < 0.35:
                inv[loc] = Constraint((const_ineq(UPPER_RELS),))
    return _assemble("random", locs, clocks, (), inv, shape, guards, rng)


def random_fully_parametric(rng: random.Random, max_locs: int = 4, max_coef: int = 2) -> GuardedPTA:
    """One parameter, no constant terms, no invariants."""
    n_locs = rng.randint(2, max_locs)
    locs, shape = _skeleton(rng, n_locs, 2 * n_locs, True)

    def atom():
        coef = rng.randint(0, max_coef)
        rhs = LinearExpr(((coef, "p"),), 0)
        return Inequality("x", rng.choice(RELATIONS), rhs)

    guards = [Constraint(tuple(atom() for _ in range(rng.randint(0, 2)))) for _ in shape]
    return _assemble("fully_parametric", locs, ("x",), ("p",), {}, shape, guards, rng)


def random_lu(
    rng: random.Random,
    max_locs: int = 4,
    max_const: int = 3,
    invariants: bool = False,
    locguards: bool = True,
) -> GuardedPTA:
    """Parameters ``pl`` (lower bound only) and ``pu`` (upper bound only)."""
    n_locs = rng.randint(2, max_locs)
    locs, shape = _skeleton(rng, n_locs, 2 * n_locs, locguards)

    def atom():
        c = rng.randint(-1, max_const)
        kind = rng.random()
        if kind < 0.3:
            rel = rng.choice(RELATIONS)
            return Inequality("x", rel, LinearExpr.constant(max(c, 0)))
        if kind < 0.65:  # lower-bound use of pl
            if rng.random() < 0.75:
                return Inequality("x", rng.choice(LOWER_RELS), LinearExpr(((1, "pl"),), c))
            return Inequality("x", rng.choice(UPPER_RELS), LinearExpr(((-1, "pl"),), max(c, 0) + 2))
        if rng.random() < 0.75:  # upper-bound use of pu
            return Inequality("x", rng.choice(UPPER_RELS), LinearExpr(((1, "pu"),), c))
        return Inequality("x", rng.choice(LOWER_RELS), LinearExpr(((-1, "pu"),), c))

    guards = [Constraint(tuple(atom() for _ in range(rng.randint(0, 2)))) for _ in shape]
    inv = {}
    if invariants:
        for loc in locs:
            if rng.random() < 0.3:
                rhs = LinearExpr(((1, "pu"),), rng.randint(0, max_const)) if rng.random() < 0.5 else LinearExpr.constant(rng.randint(1, max_const))
                inv[loc] = Constraint((Inequality("x", rng.choice(UPPER_RELS), rhs),))
    return _assemble("lu", locs, ("x",), ("pl", "pu"), inv, shape, guards, rng)


def random_parametric(rng: random.Random, max_locs: int = 5, max_const: int = 5) -> GuardedPTA:
    """Arbitrary syntax (two clocks, two parameters) for format round trips."""
    n_locs = rng.randint(1, max_locs)
    locs, shape = _skeleton(rng, n_locs, 2 * n_locs, True)
    clocks = ("x", "y")
    params = tuple(p for p in ("p", "q") if rng.random() < 0.7)

    def atom():
        terms = tuple((rng.randint(-3, 3), p) for p in params if rng.random() < 0.5)
        return Inequality(rng.choice(clocks), rng.choice(RELATIONS), LinearExpr(terms, rng.randint(-max_const, max_const)))

    guards = [Constraint(tuple(atom() for _ in range(rng.randint(0, 3)))) for _ in shape]
    inv = {loc: Constraint(tuple(atom() for _ in range(rng.randint(1, 2)))) for loc in locs if rng.random() < 0.4}
    return _assemble(f"m{rng.randint(0, 999)}", locs, clocks, params, inv, shape, guards, rng)


def corpus(kind: str, count: int, seed: int = 0, **kw) -> list[GuardedPTA]:
    gen = {
        "valuated": random_valuated,
        "fully_parametric": random_fully_parametric,
        "lu": random_lu,
        "parametric": random_parametric,
    }[kind]
    rng = random.Random(seed)
    return [gen(rng, **kw) for _ in range(count)]


def lower_or_equal(rng: random.Random, v: dict, lower, upper, p_max: Optional[int] = None) -> dict:
    """Sample v' with lower parameters no larger and upper parameters no smaller than v."""
    out = {}
    for p in lower:
        out[p] = rng.randint(0, v[p])
    for p in upper:
        out[p] = v[p] + rng.randint(0, p_max if p_max is not None else 3)
    return out
