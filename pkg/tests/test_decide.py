from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdtn.corpus import random_fully_parametric, random_lu
from pdtn.decide import (
    Answer,
    Bounds,
    Mode,
    ProblemInstance,
    apply_lu_infinity,
    bounded_pr_e,
    dtn_reach_no_invariants,
    pr_e_fully_parametric,
    pr_e_lu,
    route,
    solve,
    witness_bound,
)
from pdtn.library import build_async_read
from pdtn.model import TRUE, Edge, GuardedPTA, ModelError, conj, ineq, valuate
from pdtn.semantics import replay
from pdtn.textfmt import And, AtLeastOne, NoneIn
from pdtn.zonereach import reach


def two_locs(guard=TRUE, params=("p",), invariants=None):
    return GuardedPTA("m", ("init", "goal"), "init", ("x",), params, invariants or {}, (Edge("init", "goal", "go", guard),))


def chain():
    return GuardedPTA("chain", ("a", "b", "c"), "a", ("x",), edges=(Edge("a", "b"), Edge("b", "c", locguard="b")))


class TestDtnReach:
    def test_chain_needs_two(self):
        r = dtn_reach_no_invariants(chain(), "c")
        assert r.reachable and r.n == 2
        assert "c" in replay(r.witness, chain(), 2).locs

    def test_chain_single_process(self):
        assert not reach(chain(), {}, 1, "c").reachable

    def test_initial_target(self):
        r = dtn_reach_no_invariants(chain(), "a")
        assert r.reachable and r.n == 1 and r.witness == ()

    def test_unreachable(self):
        m = GuardedPTA("m", ("a", "b"), "a", ("x",), edges=(Edge("a", "b", locguard="b"),))
        assert not dtn_reach_no_invariants(m, "b").reachable

    @pytest.mark.parametrize(
        "model, target",
        [(build_async_read(), "error"), (valuate(build_async_read(), {"p": 1}), "error"), (chain(), "zz")],
    )
    def test_rejects(self, model, target):
        with pytest.raises(ModelError):
            dtn_reach_no_invariants(model, target)


class TestFullyParametric:
    def test_trivial_at_zero(self):
        v = pr_e_fully_parametric(ProblemInstance(two_locs(conj(ineq("x", ">=", p=1))), Mode.PRE, "goal"))
        assert (v.answer, v.exact, v.valuation, v.n) == (Answer.NONEMPTY, True, {"p": 0}, 1)

    def test_contradiction_is_empty(self):
        m = two_locs(conj(ineq("x", ">=", p=1), ineq("x", "<", p=1)))
        v = pr_e_fully_parametric(ProblemInstance(m, Mode.PRE, "goal"))
        assert v.answer is Answer.EMPTY and v.exact

    def test_needs_positive_parameter(self):
        m = two_locs(conj(ineq("x", ">", p=1), ineq("x", "<", p=2)))
        v = pr_e_fully_parametric(ProblemInstance(m, Mode.PRE, "goal"))
        assert v.answer is Answer.NONEMPTY and v.valuation == {"p": 1}

    def test_rejects_constants(self):
        with pytest.raises(ValueError):
            pr_e_fully_parametric(ProblemInstance(two_locs(conj(ineq("x", ">=", 1, p=1))), Mode.PRE, "goal"))

    def test_global_mode_is_bounded(self):
        m = two_locs(conj(ineq("x", ">=", p=1)))
        v = pr_e_fully_parametric(ProblemInstance(m, Mode.PGRE, And((NoneIn("init"), AtLeastOne("goal")))))
        assert v.answer is Answer.NONEMPTY and v.n == 1


class TestLuInfinity:
    def test_upper_deleted(self):
        m = apply_lu_infinity(two_locs(conj(ineq("x", "<", pu=1)), params=("pu",)))
        assert m.edges[0].guard.is_true

    def test_lower_to_zero(self):
        m = apply_lu_infinity(two_locs(conj(ineq("x", ">=", pl=1)), params=("pl",)))
        assert m.edges[0].guard == conj(ineq("x", ">=", 0))

    def test_sign_rules(self):
        m = apply_lu_infinity(two_locs(conj(ineq("x", "<=", 3, pu=2), ineq("x", "<=", 3, pl=-1)), params=("pl", "pu")))
        assert m.edges[0].guard == conj(ineq("x", "<=", 3))

    def test_rejects_non_lu(self):
        with pytest.raises(ModelError):
            apply_lu_infinity(two_locs(conj(ineq("x", "=", p=1))))


class TestLu:
    def test_upper_guard_witness(self):
        m = two_locs(conj(ineq("x", "<", pu=1)), params=("pu",))
        v = pr_e_lu(ProblemInstance(m, Mode.PRE, "goal"))
        assert (v.answer, v.exact, v.valuation, v.n) == (Answer.NONEMPTY, True, {"pu": 1}, 1)

    def test_witness_bound_formula(self):
        m = two_locs(conj(ineq("x", "<", pu=1)), params=("pu",))
        assert witness_bound(m, 0) == 1
        assert witness_bound(m, 3) == 4
        assert witness_bound(two_locs(conj(ineq("x", "<", -2, pu=1)), params=("pu",)), 3) == 6

    def test_deleted_lower_guard_raises_bound(self):
        m = two_locs(conj(ineq("x", ">=", 5, pu=-1)), params=("pu",))
        assert witness_bound(m, 0) == 6
        v = pr_e_lu(ProblemInstance(m, Mode.PRE, "goal"))
        assert v.answer is Answer.NONEMPTY
        assert reach(m, v.valuation, v.n, "goal").reachable

    def test_unreachable_is_empty(self):
        m = GuardedPTA("m", ("init", "goal"), "init", ("x",), ("pu",), edges=(Edge("init", "goal", locguard="goal"),))
        v = pr_e_lu(ProblemInstance(m, Mode.PRE, "goal"))
        assert v.answer is Answer.EMPTY and v.exact

    def test_async_read(self):
        m = build_async_read()
        v = pr_e_lu(ProblemInstance(m, Mode.PRE, "error"))
        assert v.answer is Answer.NONEMPTY and v.n == 3
        assert "error" in replay(v.witness, valuate(m, v.valuation), v.n).locs

    def test_invariants_make_it_bounded(self):
        m = two_locs(conj(ineq("x", ">", pl=1)), params=("pl",), invariants={"init": conj(ineq("x", "<=", 2))})
        v = pr_e_lu(ProblemInstance(m, Mode.PRE, "goal"))
        assert v.answer is Answer.NONEMPTY and v.valuation == {"pl": 0}


class TestBounded:
    def test_async_read_first_hit(self):
        v = bounded_pr_e(ProblemInstance(build_async_read(), Mode.PRE, "error"), Bounds(n_max=3, p_max=2))
        assert v.answer is Answer.NONEMPTY and v.n == 3
        # p = 0 comes first in the box and already works; p = 1 works too
        assert v.valuation == {"p": 0}
        assert reach(build_async_read(), {"p": 1}, 3, "error").reachable

    def test_initial_target(self):
        v = bounded_pr_e(ProblemInstance(two_locs(), Mode.PRE, "init"), Bounds())
        assert v.valuation == {"p": 0} and v.n == 1

    def test_unknown_reports_bounds(self):
        m = two_locs(conj(ineq("x", "<", 2, p=-1)), invariants={"init": conj(ineq("x", ">", 5))})
        v = bounded_pr_e(ProblemInstance(m, Mode.PRE, "goal"), Bounds(n_max=2, p_max=1))
        assert v.answer is Answer.UNKNOWN and not v.exact
        assert v.to_json()["bounds"] == {"n_max": 2, "p_max": 1, "state_budget": Bounds().state_budget}

    def test_budget_exceeded_is_listed(self):
        v = bounded_pr_e(ProblemInstance(build_async_read(), Mode.PRE, "error"), Bounds(n_max=2, p_max=0, state_budget=3))
        assert v.answer is Answer.UNKNOWN
        assert {"valuation": {"p": 0}, "n": 2} in v.to_json()["bounds"]["budget_exceeded"]

    def test_bounds_validation(self):
        with pytest.raises(ValueError):
            Bounds(n_max=0)


class TestRouting:
    def test_async_read_is_lu(self):
        inst = ProblemInstance(build_async_read(), Mode.PRE, "error")
        assert route(inst) == "lu"
        assert solve(inst).method == "lu"

    def test_non_lu_goes_bounded(self):
        m = two_locs(conj(ineq("x", "=", 1, p=1)))
        v = solve(ProblemInstance(m, Mode.PRE, "goal"), Bounds(n_max=2, p_max=2))
        assert v.method == "bounded" and v.answer is Answer.NONEMPTY and v.exact

    def test_parameter_free_is_exact(self):
        m = GuardedPTA("m", ("init", "goal"), "init", ("x",), edges=(Edge("init", "goal", guard=conj(ineq("x", ">", 3))),))
        assert solve(ProblemInstance(m, Mode.PRE, "goal")).exact
        unreachable = GuardedPTA("m", ("init", "goal"), "init", ("x",))
        v = solve(ProblemInstance(unreachable, Mode.PRE, "goal"))
        assert v.answer is Answer.EMPTY and v.exact

    def test_fully_parametric_preferred_when_exact(self):
        # fully parametric with one parameter used both ways: not L/U
        m = two_locs(conj(ineq("x", ">", p=1), ineq("x", "<", p=2)))
        assert route(ProblemInstance(m, Mode.PRE, "goal")) == "fully-parametric"

    def test_instance_validation(self):
        with pytest.raises(ValueError):
            ProblemInstance(two_locs(), Mode.PRE, AtLeastOne("goal"))
        with pytest.raises(ModelError):
            ProblemInstance(two_locs(), Mode.PRE, "nowhere")

    def test_verdict_json(self):
        doc = solve(ProblemInstance(build_async_read(), "pr-e", "error")).to_json()
        assert doc["answer"] == "nonempty" and doc["witness"] and doc["valuation"]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_lu_verdicts_are_sound(seed):
    rng = random.Random(seed)
    m = random_lu(rng)
    target = rng.choice(m.locations)
    v = pr_e_lu(ProblemInstance(m, Mode.PRE, target), Bounds(n_max=3, p_max=3))
    if v.answer is Answer.NONEMPTY:
        assert target in replay(v.witness, valuate(m, v.valuation), v.n).locs
    elif v.answer is Answer.EMPTY:
        for pl in range(3):
            for pu in range(4):
                for n in (1, 2):
                    assert not reach(m, {"pl": pl, "pu": pu}, n, target).reachable


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000))
def test_fully_parametric_matches_small_sweep(seed):
    rng = random.Random(seed)
    m = random_fully_parametric(rng)
    target = rng.choice(m.locations)
    v = pr_e_fully_parametric(ProblemInstance(m, Mode.PRE, target))
    sweep = any(reach(m, {"p": p}, n, target).reachable for p in range(4) for n in range(1, len(m.locations) + 1))
    assert (v.answer is Answer.NONEMPTY) == sweep
