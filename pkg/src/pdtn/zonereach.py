"""Zone-based reachability for a network of n copies of a valuated gPTA.

Symbolic states pair a location vector with a canonical DBM over the
``n * |X|`` product clocks (process ``p``, clock ``x`` lives at index
``1 + p*|X| + x``). Exploration is breadth first with a fixed successor order
(process index, then edge index), so witnesses are shortest in discrete steps
and reproducible.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional

import numpy as np
from numba import njit

from . import dbm
from .model import GuardedPTA, ModelError, valuate
from .semantics import Delay, Discrete, Goal, Trace, check_goal, eval_on_locs, replay, replay_step, initial_config

DEFAULT_BUDGET = 1_000_000


class ReachStatus(str, Enum):
    REACHABLE = "reachable"
    UNREACHABLE = "unreachable"
    BUDGET_EXCEEDED = "budget_exceeded"


@dataclass(frozen=True)
class ReachResult:
    status: ReachStatus
    witness: Optional[Trace] = None
    explored: int = 0

    @property
    def reachable(self) -> bool:
        return self.status is ReachStatus.REACHABLE

    def to_json(self) -> dict:
        from .semantics import trace_to_json

        doc = {"status": self.status.value, "explored": self.explored}
        if self.witness is not None:
            doc["witness"] = trace_to_json(self.witness)
        return doc


class _Compiled:
    """Valuated model with clocks and constraints turned into index triples."""

    def __init__(self, model: GuardedPTA):
        self.model = model
        self.H = len(model.clocks)
        cidx = {x: j for j, x in enumerate(model.clocks)}
        self.inv = {loc: self._triples(model.invariant(loc), cidx) for loc in model.locations}
        self.edges = [
            (k, e.source, e.target, e.locguard, self._triples(e.guard, cidx), tuple(sorted(cidx[x] for x in e.resets)))
            for k, e in enumerate(model.edges)
        ]
        self.by_source: dict[str, list] = {loc: [] for loc in model.locations}
        for t in self.edges:
            self.by_source[t[1]].append(t)

    @staticmethod
    def _triples(c, cidx):
        return tuple((cidx[q.clock], q.rel, q.rhs.const) for q in c)

    def constrain(self, z, proc: int, triples):
        base = 1 + proc * self.H
        for x, rel, c in triples:
            z = dbm.constrain_clock(z, base + x, rel, c)
            if z is None:
                return None
        return z

    def all_invariants(self, z, locs):
        for p, loc in enumerate(locs):
            z = self.constrain(z, p, self.inv[loc])
            if z is None:
                return None
        return z


@njit(cache=True)
def _any_covers(rows, live, k, row):
    for r in range(k):
        if not live[r]:
            continue
        for c in range(row.shape[0]):
            if rows[r, c] < row[c]:
                break
        else:
            return True
    return False


@njit(cache=True)
def _retire_included(rows, live, k, row, out):
    cnt = 0
    for r in range(k):
        if not live[r]:
            continue
        for c in range(row.shape[0]):
            if rows[r, c] > row[c]:
                break
        else:
            live[r] = False
            out[cnt] = r
            cnt += 1
    return cnt


class _Bucket:
    """Zones stored for one location vector, as rows of an int64 matrix."""

    __slots__ = ("rows", "ids", "live", "count")

    def __init__(self, width: int):
        self.rows = np.empty((4, width), dtype=np.int64)
        self.ids: list[int] = []
        self.live = np.zeros(4, dtype=np.bool_)
        self.count = 0

    def covers(self, row) -> bool:
        return self.count > 0 and _any_covers(self.rows, self.live, self.count, row)

    def drop_included(self, row) -> list[int]:
        """Retire stored zones included in ``row``; returns their node ids."""
        if not self.count:
            return []
        out = np.empty(self.count, dtype=np.int64)
        cnt = _retire_included(self.rows, self.live, self.count, row, out)
        return [self.ids[i] for i in out[:cnt]]

    def add(self, row, nid: int):
        if self.count == len(self.rows):
            self.rows = np.concatenate([self.rows, np.empty_like(self.rows)])
            self.live = np.concatenate([self.live, np.zeros_like(self.live)])
        self.rows[self.count] = row
        self.live[self.count] = True
        self.ids.append(nid)
        self.count += 1


def clock_bounds(model: GuardedPTA) -> dict[str, tuple[int, ...]]:
    """Per-location extrapolation bounds for each clock of a valuated model.

    The bound of clock ``x`` at location ``l`` is the largest absolute
    constant ``x`` can still be compared with (in an invariant or a guard)
    before its next reset, starting from ``l``. Clocks with nothing ahead of
    them get bound 0.
    """
    H = len(model.clocks)
    cidx = {x: j for j, x in enumerate(model.clocks)}
    M = {loc: [-1] * H for loc in model.locations}
    for loc in model.locations:
        for q in model.invariant(loc):
            j = cidx[q.clock]
            M[loc][j] = max(M[loc][j], abs(q.rhs.const))
    for e in model.edges:
        for q in e.guard:
            j = cidx[q.clock]
            M[e.source][j] = max(M[e.source][j], abs(q.rhs.const))
    changed = True
    while changed:
        changed = False
        for e in model.edges:
            for x, j in cidx.items():
                if x in e.resets:
                    continue
                if M[e.target][j] > M[e.source][j]:
                    M[e.source][j] = M[e.target][j]
                    changed = True
    return {loc: tuple(max(b, 0) for b in bs) for loc, bs in M.items()}


def _valuated(model: GuardedPTA, v) -> GuardedPTA:
    if model.params:
        return valuate(model, v or {})
    if v:
        extra = sorted(set(v) - set(model.params))
        if extra:
            raise ModelError(f"valuation names unknown parameters {extra}")
    return model


def _canonical_order(locs, z, H):
    """Processes sorted by location, ties broken by their clocks' bounds."""
    d = z.dim
    m = z.m

    def key(p):
        cl = range(1 + p * H, 1 + (p + 1) * H)
        return (locs[p], tuple(m[c * d] for c in cl), tuple(m[c] for c in cl))

    return sorted(range(len(locs)), key=key)


def reach(
    model: GuardedPTA,
    v,
    n: int,
    goal: Goal,
    budget: int = DEFAULT_BUDGET,
    *,
    subsumption: bool = True,
    symmetry: bool = False,
    extrapolation_k: Optional[int] = None,
) -> ReachResult:
    """Decide whether a configuration satisfying ``goal`` is reachable in ``A^n``.

    Zones are normalized with per-location clock bounds (see
    :func:`clock_bounds`); ``extrapolation_k`` replaces them by one uniform
    constant, which must be at least the model's largest absolute constant.
    """
    vm = _valuated(model, v)
    if n < 1:
        raise ValueError("network size must be positive")
    phi = check_goal(goal, vm)
    comp = _Compiled(vm)
    if extrapolation_k is None:
        local = clock_bounds(vm)

        def bounds_for(locs):
            out = [0]
            for loc in locs:
                out.extend(local[loc])
            return out
    else:
        if extrapolation_k < vm.max_constant():
            raise ValueError(f"extrapolation constant {extrapolation_k} is below the model's maximal constant")

        def bounds_for(locs):
            return extrapolation_k
    dim = n * comp.H + 1

    locs0 = (vm.initial,) * n
    z0 = comp.all_invariants(dbm.zero(dim), locs0)
    if z0 is None:
        return ReachResult(ReachStatus.UNREACHABLE, None, 0)
    z0 = comp.all_invariants(dbm.up(z0), locs0)
    z0 = dbm.extrapolate(z0, bounds_for(locs0))

    # node: (locs, zone, parent id, (proc in parent frame, edge), order)
    nodes = [(locs0, z0, -1, None, None)]
    if eval_on_locs(phi, locs0):
        return ReachResult(ReachStatus.REACHABLE, (), 1)
    covered = [False]
    depth = [0]
    passed: dict = {}
    passed.setdefault(locs0, _Bucket(dim * dim)).add(np.array(z0.m, dtype=np.int64), 0)
    exact_seen = {(locs0, z0.m)}
    queue = deque([0])

    while queue:
        nid = queue.popleft()
        if covered[nid]:
            continue
        locs, z, *_ = nodes[nid]
        for p in range(n):
            here = locs[p]
            for eidx, _src, dst, lg, guard, resets in comp.by_source[here]:
                if lg is not None and not any(l == lg for j, l in enumerate(locs) if j != p):
                    continue
                z1 = comp.constrain(z, p, guard)
                if z1 is None:
                    continue
                base = 1 + p * comp.H
                if resets:
                    z1 = dbm.reset_clocks(z1, [base + x for x in resets])
                z1 = comp.constrain(z1, p, comp.inv[dst])
                if z1 is None:
                    continue
                l2 = locs[:p] + (dst,) + locs[p + 1:]
                z1 = comp.all_invariants(dbm.up(z1), l2)
                z1 = dbm.extrapolate(z1, bounds_for(l2))
                order = None
                if symmetry:
                    order = _canonical_order(l2, z1, comp.H)
                    if order != sorted(order):
                        l2 = tuple(l2[q] for q in order)
                        z1 = dbm.permute(z1, [0] + [1 + order[q // comp.H] * comp.H + q % comp.H for q in range(n * comp.H)])
                    else:
                        order = None

                if subsumption:
                    key = (l2, z1.m)
                    if key in exact_seen:
                        continue
                    exact_seen.add(key)
                    bucket = passed.get(l2)
                    if bucket is None:
                        bucket = passed[l2] = _Bucket(dim * dim)
                    row = np.array(z1.m, dtype=np.int64)
                    if bucket.covers(row):
                        continue
                    for oid in bucket.drop_included(row):
                        # a shallower node keeps its turn so witnesses stay shortest
                        if depth[oid] > depth[nid]:
                            covered[oid] = True
                else:
                    key = (l2, z1.m)
                    if key in exact_seen:
                        continue
                if len(nodes) >= budget:
                    return ReachResult(ReachStatus.BUDGET_EXCEEDED, None, len(nodes))
                new_id = len(nodes)
                nodes.append((l2, z1, nid, (p, eidx), order))
                covered.append(False)
                depth.append(depth[nid] + 1)
                if subsumption:
                    bucket.add(row, new_id)
                else:
                    exact_seen.add(key)
                if eval_on_locs(phi, l2):
                    steps = _discrete_path(nodes, new_id)
                    witness = time_witness(vm, n, steps)
                    return ReachResult(ReachStatus.REACHABLE, witness, len(nodes))
                queue.append(new_id)
    return ReachResult(ReachStatus.UNREACHABLE, None, len(nodes))


def _discrete_path(nodes, nid) -> list[tuple[int, int]]:
    """Literal (0-based process, edge index) steps from the root to ``nid``."""
    chain = []
    while nid > 0:
        chain.append(nid)
        nid = nodes[nid][2]
    chain.reverse()
    frame = None  # frame[r] = literal process of canonical slot r
    out = []
    for cid in chain:
        locs, _, _, (p, eidx), order = nodes[cid]
        if frame is None:
            frame = list(range(len(locs)))
        out.append((frame[p], eidx))
        if order is not None:
            frame = [frame[order[r]] for r in range(len(order))]
    return out


# --------------------------------------------------------------------------
# witness timing


def _bellman_ford(size: int, arcs):
    """Shortest paths with lexicographic (int, strict-count) weights from a virtual source."""
    dist = [(0, 0)] * size
    for _ in range(size + 1):
        changed = False
        for b, a, w in arcs:
            db = dist[b]
            cand = (db[0] + w[0], db[1] + w[1])
            if cand < dist[a]:
                dist[a] = cand
                changed = True
        if not changed:
            return dist
    return None


def time_witness(model: GuardedPTA, n: int, steps) -> Trace:
    """Find rational delays realizing a discrete path, then check by replay.

    ``steps`` are (0-based process, edge index) pairs. Time points ``T_0 = 0``
    and ``T_k`` (firing time of step k) are linked by difference constraints
    derived from guards, target invariants and the invariants holding at both
    ends of each sojourn; strict bounds are handled with an infinitesimal that
    is instantiated afterwards.
    """
    H = len(model.clocks)
    cidx = {x: j for j, x in enumerate(model.clocks)}
    m = len(steps)
    arcs = []  # (b, a, (c, s)) meaning T_a - T_b <= c - s*eps

    def emit(a, b, rel, c):
        """T_a - T_b rel c."""
        if a == b:
            if not _cmp(0, rel, c):
                raise RuntimeError("witness path has an unsatisfiable zero-duration constraint")
            return
        if rel in ("<", "<=", "="):
            arcs.append((b, a, (c, -1 if rel == "<" else 0)))
        if rel in (">", ">=", "="):
            arcs.append((a, b, (-c, -1 if rel == ">" else 0)))

    last = [[0] * H for _ in range(n)]
    locs = [model.initial] * n
    for k in range(m + 1):
        # sojourn between T_k and T_{k+1}, or the state right after the last step
        for p in range(n):
            for q in model.invariant(locs[p]):
                x = cidx[q.clock]
                emit(k, last[p][x], q.rel, q.rhs.const)
        if k == m:
            break
        p, eidx = steps[k]
        e = model.edges[eidx]
        arcs.append((k + 1, k, (0, 0)))  # T_k <= T_{k+1}
        for p2 in range(n):
            for q in model.invariant(locs[p2]):
                x = cidx[q.clock]
                emit(k + 1, last[p2][x], q.rel, q.rhs.const)
        for q in e.guard:
            emit(k + 1, last[p][cidx[q.clock]], q.rel, q.rhs.const)
        for x in e.resets:
            last[p][cidx[x]] = k + 1
        locs[p] = e.target

    size = m + 1
    dist = _bellman_ford(size, arcs)
    if dist is None:
        raise RuntimeError("witness path admits no timing (zone engine bug)")
    worst = 0
    for b, a, (c, s) in arcs:
        if dist[a][0] - dist[b][0] < c:
            worst = max(worst, dist[a][1] - dist[b][1] - s)
    eps = Fraction(1, worst + 1)
    base = dist[0][0] + dist[0][1] * eps
    times = [dist[k][0] + dist[k][1] * eps - base for k in range(size)]

    trace = []
    for k, (p, eidx) in enumerate(steps):
        d = times[k + 1] - times[k]
        if d:
            trace.append(Delay(d))
        trace.append(Discrete(p + 1, eidx))
    trace = tuple(trace)
    replay(trace, model, n)  # raises ReplayError on a bug
    return trace


def _cmp(a, rel, b) -> bool:
    return {"<": a < b, "<=": a <= b, "=": a == b, ">=": a >= b, ">": a > b}[rel]


def extract_trace_time(trace, model: GuardedPTA, n: int) -> tuple[Fraction, Fraction]:
    """Total duration and the largest clock value seen while replaying ``trace``."""
    c = initial_config(model, n)
    total = Fraction(0)
    top = Fraction(0)
    for k, step in enumerate(trace):
        c = replay_step(c, k, step, model)
        if isinstance(step, Delay):
            total += step.d
            top = max([top] + [x for p in c.procs for x in p.mu])
    return total, top
