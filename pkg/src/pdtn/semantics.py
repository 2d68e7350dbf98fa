"""Concrete semantics of a network of n copies of a valuated gPTA.

Clock values are exact :class:`~fractions.Fraction` instances. Processes are
numbered from 1 in traces and in :func:`enabled_discrete`, matching the way
witnesses are printed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from .model import Constraint, Edge, GuardedPTA, ModelError, valuate
from .textfmt import And, AtLeastOne, NoneIn, Or, PropertyAst, property_locations


class ReplayError(ValueError):
    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"step {index}: {reason}")


@dataclass(frozen=True)
class ProcState:
    loc: str
    mu: tuple[Fraction, ...]  # aligned with model.clocks


@dataclass(frozen=True)
class Configuration:
    procs: tuple[ProcState, ...]

    @property
    def n(self) -> int:
        return len(self.procs)

    @property
    def locs(self) -> tuple[str, ...]:
        return tuple(p.loc for p in self.procs)


@dataclass(frozen=True)
class Delay:
    d: Fraction


@dataclass(frozen=True)
class Discrete:
    proc: int  # 1-based
    edge: int  # index into model.edges


TimedStep = Union[Delay, Discrete]
Trace = tuple  # of TimedStep
Goal = Union[str, PropertyAst]


def _require_valuated(model: GuardedPTA):
    if model.params:
        raise ModelError(f"model still has parameters {list(model.params)}; valuate it first")


def _holds(c: Constraint, model: GuardedPTA, mu: Sequence[Fraction]) -> bool:
    idx = model.clocks.index
    for q in c:
        if not q.holds(mu[idx(q.clock)], q.rhs.const):
            return False
    return True


def initial_config(model: GuardedPTA, n: int) -> Configuration:
    _require_valuated(model)
    if n < 1:
        raise ValueError("network size must be positive")
    zero = tuple(Fraction(0) for _ in model.clocks)
    if not _holds(model.invariant(model.initial), model, zero):
        raise ModelError(f"initial invariant of {model.initial!r} rejects the zero valuation")
    return Configuration(tuple(ProcState(model.initial, zero) for _ in range(n)))


def apply_delay(c: Configuration, d, model: GuardedPTA) -> Optional[Configuration]:
    """Advance every clock by ``d`` if all invariants hold on ``[0, d]``.

    Each inequality on one clock is satisfied on an interval of delays that is
    either upward or downward closed, so checking both endpoints is exact.
    """
    d = Fraction(d)
    if d < 0:
        return None
    if d == 0:
        return c
    procs = []
    for p in c.procs:
        inv = model.invariant(p.loc)
        mu = tuple(x + d for x in p.mu)
        if not (_holds(inv, model, p.mu) and _holds(inv, model, mu)):
            return None
        procs.append(ProcState(p.loc, mu))
    return Configuration(tuple(procs))


def max_delay(c: Configuration, model: GuardedPTA) -> Optional[tuple[Fraction, bool]]:
    """Supremum of admissible delays as ``(bound, attained)``; None if unbounded."""
    best = None
    for p in c.procs:
        for q in model.invariant(p.loc):
            if q.rel not in ("<", "<=", "="):
                continue
            room = q.rhs.const - p.mu[model.clocks.index(q.clock)]
            cand = (room, q.rel != "<")
            if best is None or cand < best:
                best = cand
    return best


def _occupied_by_other(c: Configuration, i: int, loc: str) -> bool:
    return any(p.loc == loc for j, p in enumerate(c.procs) if j != i)


def _fire(model: GuardedPTA, p: ProcState, e: Edge) -> Optional[ProcState]:
    if p.loc != e.source or not _holds(e.guard, model, p.mu):
        return None
    mu = tuple(Fraction(0) if x in e.resets else v for x, v in zip(model.clocks, p.mu))
    if not _holds(model.invariant(e.target), model, mu):
        return None
    return ProcState(e.target, mu)


def enabled_discrete(c: Configuration, model: GuardedPTA) -> list[tuple[int, Edge]]:
    out = []
    for i, p in enumerate(c.procs):
        for e in model.edges:
            if e.source != p.loc:
                continue
            if e.locguard is not None and not _occupied_by_other(c, i, e.locguard):
                continue
            if _fire(model, p, e) is not None:
                out.append((i + 1, e))
    return out


def apply_discrete(c: Configuration, i: int, e: Edge, model: GuardedPTA) -> Configuration:
    if not 1 <= i <= c.n:
        raise ValueError(f"process index {i} out of range 1..{c.n}")
    p = c.procs[i - 1]
    if e.locguard is not None and not _occupied_by_other(c, i - 1, e.locguard):
        raise ValueError(f"location guard {e.locguard!r} not satisfied for process {i}")
    nxt = _fire(model, p, e)
    if nxt is None:
        raise ValueError(f"edge {e.source}->{e.target} not enabled for process {i}")
    procs = list(c.procs)
    procs[i - 1] = nxt
    return Configuration(tuple(procs))


# --------------------------------------------------------------------------
# properties and goals


def goal_property(goal: Goal) -> PropertyAst:
    return AtLeastOne(goal) if isinstance(goal, str) else goal


def check_goal(goal: Goal, model: GuardedPTA) -> PropertyAst:
    phi = goal_property(goal)
    unknown = sorted(property_locations(phi) - set(model.locations))
    if unknown:
        raise ModelError(f"property mentions unknown locations {unknown}")
    return phi


def eval_on_locs(phi: PropertyAst, locs: Sequence[str]) -> bool:
    if isinstance(phi, AtLeastOne):
        return phi.loc in locs
    if isinstance(phi, NoneIn):
        return phi.loc not in locs
    if isinstance(phi, And):
        return all(eval_on_locs(k, locs) for k in phi.children)
    if isinstance(phi, Or):
        return any(eval_on_locs(k, locs) for k in phi.children)
    raise TypeError(f"not a property: {phi!r}")


def eval_property(phi: PropertyAst, c: Configuration) -> bool:
    return eval_on_locs(phi, c.locs)


# --------------------------------------------------------------------------
# traces


def replay(trace: Sequence[TimedStep], model: GuardedPTA, n: int) -> Configuration:
    """Run ``trace`` from the initial configuration; raise at the first bad step."""
    c = initial_config(model, n)
    for k, step in enumerate(trace):
        c = replay_step(c, k, step, model)
    return c


def replay_step(c: Configuration, k: int, step: TimedStep, model: GuardedPTA) -> Configuration:
    if isinstance(step, Delay):
        nxt = apply_delay(c, step.d, model)
        if nxt is None:
            raise ReplayError(k, f"delay {step.d} violates an invariant")
        return nxt
    if not 0 <= step.edge < len(model.edges):
        raise ReplayError(k, f"no edge with index {step.edge}")
    try:
        return apply_discrete(c, step.proc, model.edges[step.edge], model)
    except ValueError as exc:
        raise ReplayError(k, str(exc)) from None


def trace_to_json(trace: Sequence[TimedStep]) -> list:
    out = []
    for s in trace:
        if isinstance(s, Delay):
            out.append({"delay": str(s.d)})
        else:
            out.append({"proc": s.proc, "edge": s.edge})
    return out


def trace_from_json(doc) -> Trace:
    steps = []
    for k, s in enumerate(doc):
        if "delay" in s:
            steps.append(Delay(Fraction(s["delay"])))
        elif "proc" in s and "edge" in s:
            steps.append(Discrete(int(s["proc"]), int(s["edge"])))
        else:
            raise ValueError(f"trace step {k} is neither a delay nor a discrete step")
    return tuple(steps)


def simulate(model: GuardedPTA, n: int, v, steps: int, seed: int) -> Trace:
    """Random admissible run of at most ``steps`` steps (shorter on a timelock)."""
    if model.params:
        model = valuate(model, v)
    rng = random.Random(seed)
    c = initial_config(model, n)
    index = {id(e): k for k, e in enumerate(model.edges)}
    out = []
    while len(out) < steps:
        moves = enabled_discrete(c, model)
        bound = max_delay(c, model)
        can_wait = bound is None or bound[0] > 0
        if moves and (not can_wait or rng.random() < 0.6):
            i, e = rng.choice(moves)
            c = apply_discrete(c, i, e, model)
            out.append(Discrete(i, index[id(e)]))
            continue
        if not can_wait:
            break
        if bound is None:
            d = Fraction(rng.randint(1, 12), 4)
        else:
            d = bound[0] * Fraction(rng.randint(1, 4), 4)
            if d == bound[0] and not bound[1]:
                d = bound[0] / 2
        nxt = apply_delay(c, d, model)
        if nxt is None:  # pragma: no cover - max_delay makes this unreachable
            break
        c = nxt
        out.append(Delay(d))
    return tuple(out)
