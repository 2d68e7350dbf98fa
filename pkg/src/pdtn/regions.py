"""Classical region-graph reachability over the product clocks of a network.

Serves as an independent oracle for :mod:`pdtn.zonereach`. A region is kept
as, for every product clock, its integer part (``k + 1`` meaning "above the
maximal constant k") and the rank of its fractional part among the bounded
clocks (rank 0 = fractional part zero, equal ranks = equal fractions).
"""

from __future__ import annotations

from collections import deque
from enum import Enum

from .model import GuardedPTA
from .semantics import Goal, _require_valuated, check_goal, eval_on_locs


class OracleStatus(str, Enum):
    REACHABLE = "reachable"
    UNREACHABLE = "unreachable"
    BUDGET_EXCEEDED = "budget_exceeded"


def _normalize(ints, ranks, k):
    """Renumber fractional ranks densely, keeping 0 for integral clocks."""
    live = sorted({r for i, r in zip(ints, ranks) if i <= k and r > 0})
    remap = {r: j + 1 for j, r in enumerate(live)}
    return tuple(ints), tuple((remap.get(r, 0) if i <= k else 0) for i, r in zip(ints, ranks))


def _time_successor(region, k):
    ints, ranks = region
    bounded = [c for c, i in enumerate(ints) if i <= k]
    if not bounded:
        return None
    ints, ranks = list(ints), list(ranks)
    if any(ranks[c] == 0 for c in bounded):
        # integral clocks leave their integer point; they get the smallest fraction
        for c in bounded:
            if ranks[c] == 0:
                if ints[c] == k:
                    ints[c] = k + 1
                else:
                    ranks[c] = 1
            else:
                ranks[c] += 1
    else:
        top = max(ranks[c] for c in bounded)
        for c in bounded:
            if ranks[c] == top:
                ints[c] += 1
                ranks[c] = 0
    return _normalize(ints, ranks, k)


def _satisfies(region, clock, rel, c, k):
    i = region[0][clock]
    frac0 = region[1][clock] == 0
    if i > k:  # value > k >= |c|
        return rel in (">", ">=")
    # value in {i} if frac0 else (i, i+1)
    if rel == "<":
        return i < c
    if rel == "<=":
        return i < c or (i == c and frac0)
    if rel == "=":
        return i == c and frac0
    if rel == ">=":
        return i >= c
    return i > c or (i == c and not frac0)


def region_reach_oracle(model: GuardedPTA, n: int, goal: Goal, state_budget: int = 200_000) -> OracleStatus:
    _require_valuated(model)
    phi = check_goal(goal, model)
    k = max(model.max_constant(), 0)
    H = len(model.clocks)
    cidx = {x: j for j, x in enumerate(model.clocks)}

    def compiled(constraint):
        return [(cidx[q.clock], q.rel, q.rhs.const) for q in constraint]

    inv = {loc: compiled(model.invariant(loc)) for loc in model.locations}
    edges = [(e.source, e.target, e.locguard, compiled(e.guard), [cidx[x] for x in e.resets]) for e in model.edges]

    def sat(region, proc, cons):
        return all(_satisfies(region, proc * H + x, rel, c, k) for x, rel, c in cons)

    def invariants_hold(locs, region):
        return all(sat(region, p, inv[l]) for p, l in enumerate(locs))

    zero = _normalize([0] * (n * H), [0] * (n * H), k)
    locs0 = (model.initial,) * n
    if not invariants_hold(locs0, zero):
        return OracleStatus.UNREACHABLE
    start = (locs0, zero)
    seen = {start}
    queue = deque([start])
    while queue:
        locs, region = queue.popleft()
        if eval_on_locs(phi, locs):
            return OracleStatus.REACHABLE
        succs = []
        nxt = _time_successor(region, k)
        if nxt is not None and nxt != region and invariants_hold(locs, nxt):
            succs.append((locs, nxt))
        for p, here in enumerate(locs):
            for src, dst, lg, guard, resets in edges:
                if src != here:
                    continue
                if lg is not None and not any(l == lg for j, l in enumerate(locs) if j != p):
                    continue
                if not sat(region, p, guard):
                    continue
                ints, ranks = list(region[0]), list(region[1])
                for x in resets:
                    ints[p * H + x] = 0
                    ranks[p * H + x] = 0
                r2 = _normalize(ints, ranks, k)
                if not sat(r2, p, inv[dst]):
                    continue
                l2 = locs[:p] + (dst,) + locs[p + 1:]
                succs.append((l2, r2))
        for s in succs:
            if s not in seen:
                if len(seen) >= state_budget:
                    return OracleStatus.BUDGET_EXCEEDED
                seen.add(s)
                queue.append(s)
    return OracleStatus.UNREACHABLE
