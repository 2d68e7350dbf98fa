"""Two-counter machines: execution and compilation into PDTN gadgets.

Location names follow a subscript scheme: ``s_<i>`` (or ``s_<i>_<part>``)
for the location simulating machine state number ``i``, ``l_<i>_...`` for
intermediate gadget locations, ``init_*`` for the initial gadget and
``sink_<i>`` for the fixed-size sinks. ``part`` is ``t`` for the process
simulating the global clock and ``1``/``2`` for the counter processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .model import Edge, GuardedPTA, conj, ineq, valuate
from .semantics import Delay, Discrete, initial_config, replay_step
from .textfmt import Inc, MachineProgram, ZDec


@dataclass(frozen=True)
class MachineConfig:
    state: str
    c1: int
    c2: int


@dataclass(frozen=True)
class Halted:
    steps: int
    c_max: int
    run: tuple[MachineConfig, ...]


@dataclass(frozen=True)
class Running:
    c_max: int


def run_2cm(m: MachineProgram, max_steps: int) -> Union[Halted, Running]:
    cfg = MachineConfig(m.initial, 0, 0)
    run = [cfg]
    c_max = 0
    for k in range(max_steps + 1):
        if cfg.state == m.halt:
            return Halted(k, c_max, tuple(run))
        if k == max_steps:
            break
        step = m.steps[cfg.state]
        c = [cfg.c1, cfg.c2]
        if isinstance(step, Inc):
            c[step.counter - 1] += 1
            nxt = step.next
        elif c[step.counter - 1] > 0:
            c[step.counter - 1] -= 1
            nxt = step.next_nonzero
        else:
            nxt = step.next_zero
        cfg = MachineConfig(nxt, c[0], c[1])
        run.append(cfg)
        c_max = max(c_max, cfg.c1, cfg.c2)
    return Running(c_max)


# --------------------------------------------------------------------------
# encoding kinds


@dataclass(frozen=True)
class SinglePta:
    pass


@dataclass(frozen=True)
class ThreeProcess:
    with_invariants: bool = True


@dataclass(frozen=True)
class FixedN:
    n: int
    with_invariants: bool = False

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("fixed-size encoding needs n >= 3")


EncodingKind = Union[SinglePta, ThreeProcess, FixedN]

P = "p"


class _Builder:
    def __init__(self):
        self.locations: list[str] = []
        self.invariants: dict = {}
        self.edges: list[Edge] = []
        self.roles: dict[str, tuple[Optional[str], str]] = {}

    def loc(self, name, state=None, role="", inv=None):
        if name not in self.locations:
            self.locations.append(name)
            self.roles[name] = (state, role)
        if inv is not None:
            self.invariants[name] = inv
        return name

    def edge(self, src, dst, guard=(), locguard=None, resets=()):
        self.edges.append(Edge(src, dst, "a", conj(*guard), locguard, frozenset(resets)))


def _index(m: MachineProgram) -> dict[str, int]:
    return {s: i for i, s in enumerate(m.states)}


def sigma_name(m: MachineProgram, state: str, part: Optional[str] = None) -> str:
    i = _index(m)[state]
    return f"s_{i}" if part is None else f"s_{i}_{part}"


def halt_location(m: MachineProgram, kind: EncodingKind) -> str:
    if isinstance(kind, SinglePta):
        return sigma_name(m, m.halt)
    return f"s_{_index(m)[m.halt]}"


# --------------------------------------------------------------------------
# single PTA with three clocks


def compile_single_pta(m: MachineProgram) -> GuardedPTA:
    model, _ = _single_pta(m)
    return model


def _single_pta(m: MachineProgram):
    b = _Builder()
    idx = _index(m)
    t = "t"
    xs = {1: "x1", 2: "x2"}
    b.loc("l_0", None, "init")
    for s in m.states:
        b.loc(f"s_{idx[s]}", s, "sigma")
    b.edge("l_0", f"s_{idx[m.initial]}", [ineq(t, "=", 0, p=1), ineq(t, ">", 1)], resets=(t, "x1", "x2"))

    for s in m.states:
        step = m.steps.get(s)
        if step is None:
            continue
        i = idx[s]
        si = f"s_{i}"
        mine, other = xs[step.counter], xs[3 - step.counter]
        if isinstance(step, Inc):
            target, delta = f"s_{idx[step.next]}", -1
            first = [ineq(t, "=", 0)]
        else:
            target, delta = f"s_{idx[step.next_nonzero]}", 1
            first = [ineq(t, "=", 0), ineq(mine, ">", 0)]
        l1, l2, l2p, l3 = (b.loc(f"l_{i}_{r}", s, r) for r in ("1", "2", "2p", "3"))
        b.edge(si, l1, first)
        b.edge(l1, l2, [ineq(other, "=", 0, p=1)], resets=(other,))
        b.edge(l1, l2p, [ineq(mine, "=", delta, p=1)], resets=(mine,))
        b.edge(l2, l3, [ineq(mine, "=", delta, p=1)], resets=(mine,))
        b.edge(l2p, l3, [ineq(other, "=", 0, p=1)], resets=(other,))
        b.edge(l3, target, [ineq(t, "=", 0, p=1)], resets=(t,))
        if isinstance(step, ZDec):
            k1, k2 = b.loc(f"l_{i}_k1", s, "k1"), b.loc(f"l_{i}_k2", s, "k2")
            b.edge(si, k1, [ineq(t, "=", 0), ineq(mine, "=", 0)])
            b.edge(k1, k2, [ineq(other, "=", 0, p=1)], resets=(other,))
            b.edge(k2, f"s_{idx[step.next_zero]}", [ineq(t, "=", 0, p=1)], resets=(t, mine))

    model = GuardedPTA(
        name="single_pta",
        locations=tuple(b.locations),
        initial="l_0",
        clocks=(t, "x1", "x2"),
        params=(P,),
        edges=tuple(b.edges),
    )
    return model, b.roles


# --------------------------------------------------------------------------
# one clock per process, three cooperating processes


def compile_three_process(m: MachineProgram, with_invariants: bool = True) -> GuardedPTA:
    model, _ = _multi(m, 3, with_invariants)
    return model


def compile_fixed_n(m: MachineProgram, n: int, with_invariants: bool = False) -> GuardedPTA:
    if n < 3:
        raise ValueError("fixed-size encoding needs n >= 3")
    model, _ = _multi(m, n, with_invariants)
    return model


def _multi(m: MachineProgram, n: int, with_invariants: bool):
    b = _Builder()
    idx = _index(m)
    x = "x"

    def le(c=0, pc=1):
        return conj(ineq(x, "<=", c, p=pc))

    eq0 = conj(ineq(x, "=", 0))

    def sig(state, part):
        return f"s_{idx[state]}_{part}"

    # initial gadget
    b.loc("init_0_t", None, "init", le())
    for part in ("t", "1", "2"):
        b.loc(f"init_1_{part}", None, "init", eq0)
    sinks = [f"sink_{i}" for i in range(3, n)]
    s0 = m.initial
    b.edge("init_0_t", "init_1_t", [ineq(x, "=", 0, p=1), ineq(x, ">", 1)], resets=(x,))
    b.edge("init_1_t", sig(s0, "t"), [ineq(x, "=", 0)], locguard=sinks[-1] if sinks else "init_1_2")
    b.edge("init_0_t", "init_1_1", locguard="init_1_t", resets=(x,))
    b.edge("init_0_t", "init_1_2", locguard="init_1_1", resets=(x,))
    b.edge("init_1_1", sig(s0, "1"), [ineq(x, "=", 0)], locguard=sig(s0, "t"))
    b.edge("init_1_2", sig(s0, "2"), [ineq(x, "=", 0)], locguard=sig(s0, "t"))
    prev = "init_1_2"
    for s in sinks:
        b.loc(s, None, "sink")
        b.edge("init_0_t", s, locguard=prev)
        prev = s

    halt_entry = {sig(m.halt, "1"), sig(m.halt, "2")}

    def enter(src, dst, guard=(), locguard=None, resets=()):
        # counter processes must enter the halting locations with a fresh clock
        if dst in halt_entry:
            resets = tuple(resets) + (x,)
        b.edge(src, dst, guard, locguard, tuple(dict.fromkeys(resets)))

    for s in m.states:
        i = idx[s]
        step = m.steps.get(s)
        if step is None:
            for part in ("t", "1", "2"):
                b.loc(sig(s, part), s, f"sigma_{part}", eq0)
            continue
        l = str(step.counter)
        o = str(3 - step.counter)
        st, sl, so = sig(s, "t"), sig(s, l), sig(s, o)
        b.loc(st, s, "sigma_t", eq0)
        if isinstance(step, Inc):
            b.loc(sl, s, f"sigma_{l}", le(-1))
            b.loc(so, s, f"sigma_{o}", le())
            j = step.next
            lt = b.loc(f"l_{i}_t", s, "inc_t", le())
            ll = b.loc(f"l_{i}_{l}", s, f"inc_{l}", le())
            lo = b.loc(f"l_{i}_{o}", s, f"inc_{o}", le())
            b.edge(st, lt, [ineq(x, "=", 0)])
            b.edge(lt, sig(j, "t"), [ineq(x, "=", 0, p=1)], resets=(x,))
            b.edge(sl, ll, [ineq(x, "=", -1, p=1)], resets=(x,))
            enter(ll, sig(j, l), [ineq(x, "<=", 0, p=1)], locguard=sig(j, "t"))
            b.edge(so, lo, [ineq(x, "=", 0, p=1)], resets=(x,))
            enter(lo, sig(j, o), [ineq(x, "<=", 0, p=1)], locguard=sig(j, "t"))
        else:
            b.loc(sl, s, f"sigma_{l}", le(1))
            b.loc(so, s, f"sigma_{o}", le())
            j, k = step.next_nonzero, step.next_zero
            lt = b.loc(f"l_{i}_t", s, "dec_t", le())
            lkt = b.loc(f"l_{i}_k_t", s, "zero_t", le())
            li1 = b.loc(f"l_{i}_i1_{l}", s, f"dec_{l}_1", le(1))
            li2 = b.loc(f"l_{i}_i2_{l}", s, f"dec_{l}_2", le())
            lkl = b.loc(f"l_{i}_k_{l}", s, f"zero_{l}", le())
            lo = b.loc(f"l_{i}_{o}", s, f"dec_{o}", le())
            lko = b.loc(f"l_{i}_k_{o}", s, f"zero_{o}", le())
            # t part
            b.edge(st, lt, [ineq(x, "=", 0)], locguard=li1)
            b.edge(lt, sig(j, "t"), [ineq(x, "=", 0, p=1)], resets=(x,))
            b.edge(st, lkt, [ineq(x, "=", 0)], locguard=lkl)
            b.edge(lkt, sig(k, "t"), [ineq(x, "=", 0, p=1)], resets=(x,))
            # tested counter
            b.edge(sl, li1, [ineq(x, ">", 0)], locguard=st)
            b.edge(li1, li2, [ineq(x, "=", 1, p=1)], resets=(x,))
            enter(li2, sig(j, l), [ineq(x, "<=", 0, p=1)], locguard=sig(j, "t"))
            b.edge(sl, lkl, [ineq(x, "=", 0)], locguard=st)
            enter(lkl, sig(k, l), [ineq(x, "=", 0, p=1)], locguard=sig(k, "t"), resets=(x,))
            # other counter
            b.edge(so, lo, [ineq(x, "=", 0, p=1)], locguard=lt, resets=(x,))
            enter(lo, sig(j, o), [ineq(x, "<=", 0, p=1)], locguard=sig(j, "t"))
            b.edge(so, lko, [ineq(x, "=", 0, p=1)], locguard=lkt, resets=(x,))
            enter(lko, sig(k, o), [ineq(x, "<=", 0, p=1)], locguard=sig(k, "t"))

    # final gadget
    h = idx[m.halt]
    goal = b.loc(f"s_{h}", m.halt, "halt", eq0)
    lht, lh1, lh2 = (b.loc(f"l_{h}_{part}", m.halt, f"final_{part}", eq0) for part in ("t", "1", "2"))
    b.edge(sig(m.halt, "t"), lht, [ineq(x, "=", 0)])
    b.edge(lht, goal, [ineq(x, "=", 0)], locguard=lh2)
    b.edge(sig(m.halt, "1"), lh1, [ineq(x, "=", 0)], locguard=lht)
    b.edge(lh1, goal, [ineq(x, "=", 0)], locguard=goal)
    b.edge(sig(m.halt, "2"), lh2, [ineq(x, "=", 0)], locguard=lh1)
    b.edge(lh2, goal, [ineq(x, "=", 0)], locguard=goal)

    name = "three_process" if n == 3 else f"fixed_{n}"
    model = GuardedPTA(
        name=name,
        locations=tuple(b.locations),
        initial="init_0_t",
        clocks=(x,),
        params=(P,),
        invariants=b.invariants if with_invariants else {},
        edges=tuple(b.edges),
    )
    return model, b.roles


def encode(m: MachineProgram, kind: EncodingKind):
    """Compile ``m``; returns the model and a map location -> (state, role)."""
    if isinstance(kind, SinglePta):
        return _single_pta(m)
    if isinstance(kind, ThreeProcess):
        return _multi(m, 3, kind.with_invariants)
    if isinstance(kind, FixedN):
        return _multi(m, kind.n, kind.with_invariants)
    raise TypeError(f"unknown encoding {kind!r}")


def parse_encoding(text: str, with_invariants: bool = False) -> EncodingKind:
    if text == "single":
        return SinglePta()
    if text == "three":
        return ThreeProcess(with_invariants)
    if text.startswith("fixed:"):
        try:
            n = int(text.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad encoding {text!r}") from None
        return FixedN(n, with_invariants)
    raise ValueError(f"unknown encoding {text!r} (expected single, three or fixed:N)")


# --------------------------------------------------------------------------
# instrumented replay


@dataclass(frozen=True)
class SigmaVisit:
    time: Fraction
    state: str
    t: Fraction
    x1: Fraction
    x2: Fraction


def sigma_visits(m: MachineProgram, model: GuardedPTA, trace, p: Optional[int] = None) -> list[SigmaVisit]:
    """Replay a single-PTA trace and record every arrival at a state location."""
    if model.params:
        if p is None:
            raise ValueError("a parametric encoding needs a value for p")
        model = valuate(model, {P: p})
    where = {sigma_name(m, s): s for s in m.states}
    c = initial_config(model, 1)
    now = Fraction(0)
    out = []
    for k, step in enumerate(trace):
        c = replay_step(c, k, step, model)
        if isinstance(step, Delay):
            now += step.d
        elif isinstance(step, Discrete):
            loc = c.procs[0].loc
            if loc in where:
                t, x1, x2 = c.procs[0].mu
                out.append(SigmaVisit(now, where[loc], t, x1, x2))
    return out


def check_fidelity(m: MachineProgram, model: GuardedPTA, trace, p: int) -> list[str]:
    """Compare a single-PTA witness with the machine run; returns the problems found."""
    res = run_2cm(m, 10_000)
    if not isinstance(res, Halted):
        return ["machine does not halt within 10000 steps"]
    visits = sigma_visits(m, model, trace, p)
    problems = []
    if len(visits) != len(res.run):
        problems.append(f"{len(visits)} state visits for a run of {len(res.run)} configurations")
    for k, (vis, cfg) in enumerate(zip(visits, res.run)):
        if vis.state != cfg.state:
            problems.append(f"visit {k}: at {vis.state}, machine at {cfg.state}")
        if (vis.t, vis.x1, vis.x2) != (0, cfg.c1, cfg.c2):
            problems.append(f"visit {k}: clocks t={vis.t} x1={vis.x1} x2={vis.x2}, counters {cfg.c1},{cfg.c2}")
    for k in range(len(visits) - 1):
        if isinstance(m.steps.get(visits[k].state), Inc):
            span = visits[k + 1].time - visits[k].time
            if span != p:
                problems.append(f"increment at visit {k} took {span}, expected {p}")
    return problems
