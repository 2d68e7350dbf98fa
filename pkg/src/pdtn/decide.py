"""Parametrised reachability-emptiness: exact procedures and a bounded fallback.

Empty is only reported when it is provably exact: the cutoff argument for
invariant-free local reachability, combined either with the two-valuation
test for fully parametric models or with the infinite L/U valuation. Every
other negative outcome is "unknown up to bounds".
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

from .model import (
    Constraint,
    GuardedPTA,
    Inequality,
    ModelError,
    check_valid,
    classify,
    lu_partition,
    valuate,
)
from .semantics import ReplayError, Trace, eval_on_locs, goal_property, replay, trace_to_json
from .textfmt import PropertyAst, format_property, property_locations
from .zonereach import DEFAULT_BUDGET, ReachStatus, extract_trace_time, reach


class Mode(str, Enum):
    PRE = "pr-e"
    PGRE = "pgr-e"


class Answer(str, Enum):
    EMPTY = "empty"
    NONEMPTY = "nonempty"
    UNKNOWN = "unknown"


class BudgetExhausted(RuntimeError):
    def __init__(self, explored: int):
        self.explored = explored
        super().__init__(f"state budget exhausted after {explored} symbolic states")


class SelfCheckError(AssertionError):
    """A certificate failed to re-validate; always a bug, never a verdict."""


@dataclass(frozen=True)
class ProblemInstance:
    model: GuardedPTA
    mode: Mode
    target: Union[str, PropertyAst]

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.mode is Mode.PRE and not isinstance(self.target, str):
            raise ValueError("pr-e needs a single target location")
        unknown = property_locations(goal_property(self.target)) - set(self.model.locations)
        if unknown:
            raise ModelError(f"target mentions unknown locations {sorted(unknown)}")

    def target_text(self) -> str:
        return self.target if isinstance(self.target, str) else format_property(self.target)


@dataclass(frozen=True)
class Bounds:
    n_max: int = 4
    p_max: int = 4
    state_budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.n_max < 1 or self.p_max < 0 or self.state_budget < 1:
            raise ValueError("bounds must be positive (p_max may be 0)")

    def to_json(self) -> dict:
        return {"n_max": self.n_max, "p_max": self.p_max, "state_budget": self.state_budget}


@dataclass(frozen=True)
class Verdict:
    answer: Answer
    exact: bool
    method: str
    valuation: Optional[dict] = None
    n: Optional[int] = None
    witness: Optional[Trace] = None
    bounds: Optional[Bounds] = None
    explored: int = 0
    exhausted: tuple = ()  # (valuation, n) pairs whose query ran out of budget

    def to_json(self) -> dict:
        doc = {"answer": self.answer.value, "exact": self.exact, "method": self.method, "explored": self.explored}
        if self.answer is Answer.NONEMPTY:
            doc["valuation"] = dict(self.valuation)
            doc["n"] = self.n
            doc["witness"] = trace_to_json(self.witness)
        if self.bounds is not None:
            b = self.bounds.to_json()
            if self.exhausted:
                b["budget_exceeded"] = [{"valuation": dict(v), "n": n} for v, n in self.exhausted]
            doc["bounds"] = b
        return doc


def _nonempty(method, v, n, witness, explored) -> Verdict:
    return Verdict(Answer.NONEMPTY, True, method, dict(v), n, witness, None, explored)


def _unknown(method, bounds, explored, exhausted=()) -> Verdict:
    return Verdict(Answer.UNKNOWN, False, method, bounds=bounds, explored=explored, exhausted=tuple(exhausted))


# --------------------------------------------------------------------------
# invariant-free DTN reachability through the cutoff


@dataclass(frozen=True)
class DtnResult:
    reachable: bool
    n: Optional[int] = None
    witness: Optional[Trace] = None
    explored: int = 0


def dtn_reach_no_invariants(model: GuardedPTA, target: str, budget: int = DEFAULT_BUDGET) -> DtnResult:
    """Is ``target`` reachable for some network size? Exact without invariants.

    The number of locations is a cutoff; when the target is reachable there,
    the smallest size is found by walking downwards (reachability is
    monotone in the size, so the walk stops at the first failure).
    """
    if model.params:
        raise ModelError("dtn_reach_no_invariants expects a valuated model")
    if model.has_invariants:
        raise ModelError("the cutoff argument needs a model without invariants")
    if target not in model.locations:
        raise ModelError(f"unknown target location {target!r}")
    explored = 0

    def run(n):
        nonlocal explored
        r = reach(model, {}, n, target, budget, symmetry=True)
        explored += r.explored
        if r.status is ReachStatus.BUDGET_EXCEEDED:
            raise BudgetExhausted(explored)
        return r

    cutoff = len(model.locations)
    best = run(cutoff)
    if not best.reachable:
        return DtnResult(False, explored=explored)
    n = cutoff
    for smaller in range(cutoff - 1, 0, -1):
        r = run(smaller)
        if not r.reachable:
            break
        best, n = r, smaller
    return DtnResult(True, n, best.witness, explored)


def _bounded_search(model, target, valuations, bounds, method, to_verdict=None):
    """First hit over ``valuations`` x sizes 1..n_max, else unknown."""
    explored = 0
    exhausted = []
    for v in valuations:
        for n in range(1, bounds.n_max + 1):
            r = reach(model, v, n, target, bounds.state_budget, symmetry=True)
            explored += r.explored
            if r.status is ReachStatus.REACHABLE:
                if to_verdict is not None:
                    return to_verdict(v, n, r.witness, explored)
                return _nonempty(method, v, n, r.witness, explored)
            if r.status is ReachStatus.BUDGET_EXCEEDED:
                exhausted.append((dict(v), n))
    return _unknown(method, bounds, explored, exhausted)


# --------------------------------------------------------------------------
# fully parametric, one parameter


def pr_e_fully_parametric(inst: ProblemInstance, bounds: Bounds = Bounds()) -> Verdict:
    report = classify(inst.model)
    if not report.fully_parametric or report.param_count != 1:
        raise ValueError("pr_e_fully_parametric needs a fully parametric model with exactly one parameter")
    method = "fully-parametric"
    p = inst.model.params[0]
    # scaling every constant preserves behaviour, so p = 0 and p = 1 cover all cases
    candidates = ({p: 0}, {p: 1})
    if inst.mode is Mode.PRE and not inst.model.has_invariants:
        explored = 0
        for v in candidates:
            try:
                r = dtn_reach_no_invariants(valuate(inst.model, v), inst.target, bounds.state_budget)
            except BudgetExhausted as exc:
                return _unknown(method, bounds, explored + exc.explored, [(v, len(inst.model.locations))])
            explored += r.explored
            if r.reachable:
                return _nonempty(method, v, r.n, r.witness, explored)
        return Verdict(Answer.EMPTY, True, method, explored=explored)
    return _bounded_search(inst.model, inst.target, candidates, bounds, method)


# --------------------------------------------------------------------------
# L/U models


def _deleted_by_infinity(q: Inequality, upper: set) -> bool:
    for c, p in q.rhs.terms:
        if p in upper and ((c > 0 and q.rel in ("<", "<=")) or (c < 0 and q.rel in (">", ">="))):
            return True
    return False


def apply_lu_infinity(model: GuardedPTA) -> GuardedPTA:
    """Lower-bound parameters to 0, upper-bound parameters to infinity.

    Inequalities that an infinite upper-bound parameter makes trivially true
    are deleted; the rest only mention lower-bound parameters.
    """
    part = lu_partition(check_valid(model))
    if part is None:
        raise ModelError("model is not L/U: some parameter is used both as a lower and an upper bound")
    lower, upper = part
    up = set(upper)

    def strip(c: Constraint) -> Constraint:
        return Constraint(tuple(q for q in c if not _deleted_by_infinity(q, up)))

    stripped = replace(
        model,
        invariants={loc: strip(c) for loc, c in model.invariants.items()},
        edges=tuple(replace(e, guard=strip(e.guard)) for e in model.edges),
    )
    return valuate(stripped, {p: 0 for p in model.params})


def witness_bound(model: GuardedPTA, max_clock) -> int:
    """Integer value for upper-bound parameters that keeps a run of ``model``
    under the infinite valuation valid (clock values never exceed ``max_clock``)."""
    consts = [q.rhs.const for q in model.inequalities()]
    smallest = min(consts, default=0)
    D = math.ceil(max_clock + abs(smallest) + 1)
    part = lu_partition(model)
    up = set(part[1]) if part else set()
    # a deleted "x >= -a*u + c" needs -a*D + c <= 0 as well
    for q in model.inequalities():
        if q.rel in (">", ">=") and _deleted_by_infinity(q, up) and q.rhs.const > 0:
            D = max(D, math.ceil(max_clock + q.rhs.const + 1))
    return D


def pr_e_lu(inst: ProblemInstance, bounds: Bounds = Bounds()) -> Verdict:
    model = inst.model
    part = lu_partition(check_valid(model))
    if part is None:
        raise ValueError("pr_e_lu needs an L/U model")
    lower, upper = part
    method = "lu"
    infinite = apply_lu_infinity(model)

    def certify(_v, n, witness, explored):
        _, top = extract_trace_time(witness, infinite, n)
        D = witness_bound(model, top)
        v_star = {p: (D if p in upper else 0) for p in model.params}
        concrete = valuate(model, v_star)
        try:
            replay(witness, concrete, n)
        except ReplayError as exc:
            raise SelfCheckError(f"witness does not replay under {v_star}: {exc}") from None
        again = reach(model, v_star, n, inst.target, bounds.state_budget, symmetry=True)
        if again.status is ReachStatus.BUDGET_EXCEEDED:
            # the replayed witness already certifies the answer
            return _nonempty(method, v_star, n, witness, explored + again.explored)
        if again.status is not ReachStatus.REACHABLE:
            raise SelfCheckError(f"target not reachable at {v_star}, n={n} ({again.status.value})")
        final = replay(again.witness, concrete, n)
        if not eval_on_locs(goal_property(inst.target), final.locs):
            raise SelfCheckError("re-extracted witness misses the target")
        return _nonempty(method, v_star, n, again.witness, explored + again.explored)

    if inst.mode is Mode.PRE and not infinite.has_invariants:
        try:
            r = dtn_reach_no_invariants(infinite, inst.target, bounds.state_budget)
        except BudgetExhausted as exc:
            return _unknown(method, bounds, exc.explored, [({}, len(model.locations))])
        if not r.reachable:
            return Verdict(Answer.EMPTY, True, method, explored=r.explored)
        return certify(None, r.n, r.witness, r.explored)
    return _bounded_search(infinite, inst.target, [{}], bounds, method, certify)


# --------------------------------------------------------------------------
# general fallback and dispatch


def bounded_pr_e(inst: ProblemInstance, bounds: Bounds = Bounds()) -> Verdict:
    """Witness search over ``[0, p_max]^|P|`` (lexicographic) and sizes ``1..n_max``."""
    params = inst.model.params
    box = (dict(zip(params, vals)) for vals in itertools.product(range(bounds.p_max + 1), repeat=len(params)))
    return _bounded_search(inst.model, inst.target, box, bounds, "bounded")


def route(inst: ProblemInstance) -> str:
    """Name of the procedure :func:`solve` will use."""
    report = classify(inst.model)
    lu = report.lu_partition is not None
    fp = report.fully_parametric and report.param_count == 1
    local = inst.mode is Mode.PRE
    exact_lu = lu and local and not apply_lu_infinity(inst.model).has_invariants
    exact_fp = fp and local and not inst.model.has_invariants
    if exact_lu:
        return "lu"
    if exact_fp:
        return "fully-parametric"
    if lu:
        return "lu"
    if fp:
        return "fully-parametric"
    return "bounded"


def solve(inst: ProblemInstance, bounds: Bounds = Bounds()) -> Verdict:
    check_valid(inst.model)
    how = route(inst)
    if how == "lu":
        return pr_e_lu(inst, bounds)
    if how == "fully-parametric":
        return pr_e_fully_parametric(inst, bounds)
    return bounded_pr_e(inst, bounds)
