from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdtn.library import build_async_read
from pdtn.model import (
    TRUE,
    Constraint,
    Edge,
    GuardedPTA,
    Inequality,
    LinearExpr,
    ModelError,
    check_valid,
    classify,
    conj,
    eval_constraint,
    ineq,
    lu_partition,
    reset,
    validate,
    valuate,
)


def tiny(guard=TRUE, invariants=None, params=("p",), resets=()):
    return GuardedPTA(
        "tiny", ("a", "b"), "a", ("x",), params, invariants or {}, (Edge("a", "b", "go", guard, None, frozenset(resets)),)
    )


class TestLinearExpr:
    def test_merges_and_drops_zero_terms(self):
        e = LinearExpr(((1, "p"), (2, "q"), (-1, "p")), 3)
        assert e.terms == ((2, "q"),)
        assert e.const == 3

    def test_evaluate(self):
        assert LinearExpr(((2, "p"),), 1).evaluate({"p": 3}) == 7

    def test_missing_parameter(self):
        with pytest.raises(ModelError):
            LinearExpr.param("p").evaluate({})

    @given(st.integers(-5, 5), st.integers(-5, 5), st.integers(0, 9), st.integers(-9, 9))
    def test_substitute_matches_evaluate(self, a, b, pv, c):
        e = LinearExpr(((a, "p"), (b, "q")), c)
        v = {"p": pv, "q": 2}
        assert e.substitute({"p": pv}).evaluate({"q": 2}) == e.evaluate(v)


def test_unknown_relation_rejected():
    with pytest.raises(ModelError):
        Inequality("x", "!=", LinearExpr.constant(1))


class TestValidate:
    def test_async_read_is_well_formed(self):
        assert validate(build_async_read()) == []

    def test_undeclared_target(self):
        m = GuardedPTA("m", ("a",), "a", ("x",), edges=(Edge("a", "ghost"),))
        diags = validate(m)
        assert len(diags) == 1 and "ghost" in diags[0]

    def test_undeclared_reset_clock(self):
        m = GuardedPTA("m", ("a",), "a", ("x",), edges=(Edge("a", "a", resets={"y"}),))
        diags = validate(m)
        assert len(diags) == 1 and "y" in diags[0]

    def test_undeclared_parameter_and_locguard(self):
        m = GuardedPTA("m", ("a",), "a", ("x",), edges=(Edge("a", "a", guard=conj(ineq("x", "<", q=1)), locguard="zz"),))
        text = " ".join(validate(m))
        assert "q" in text and "zz" in text

    def test_check_valid_raises(self):
        with pytest.raises(ModelError):
            check_valid(GuardedPTA("m", ("a",), "nowhere", ("x",)))


class TestClassify:
    def test_async_read(self):
        r = classify(build_async_read())
        assert (r.clock_count, r.param_count, r.has_invariants) == (1, 1, True)
        assert r.lu_partition == (("p",), ())
        assert not r.fully_parametric

    def test_fully_parametric(self):
        assert classify(tiny(conj(ineq("x", ">=", p=1)))).fully_parametric

    def test_equality_is_not_lu(self):
        assert lu_partition(tiny(conj(ineq("x", "=", p=1)))) is None

    def test_upper_and_lower_roles(self):
        m = GuardedPTA(
            "m", ("a", "b"), "a", ("x",), ("pl", "pu"),
            edges=(Edge("a", "b", guard=conj(ineq("x", ">", pl=1), ineq("x", "<", 3, pu=2))),),
        )
        assert lu_partition(m) == (("pl",), ("pu",))

    def test_negative_coefficient_flips_role(self):
        assert lu_partition(tiny(conj(ineq("x", "<=", 3, p=-1)))) == (("p",), ())
        assert lu_partition(tiny(conj(ineq("x", ">=", 3, p=-1)))) == ((), ("p",))

    def test_mixed_roles(self):
        assert lu_partition(tiny(conj(ineq("x", ">", p=1), ineq("x", "<", 4, p=1)))) is None

    def test_unconstrained_parameter_is_lower(self):
        assert lu_partition(tiny()) == (("p",), ())

    def test_report_json(self):
        doc = classify(build_async_read()).to_json()
        assert doc["lu_partition"] == {"lower": ["p"], "upper": []}


class TestValuate:
    def test_async_read_error_guard(self):
        m = valuate(build_async_read(), {"p": 1})
        (e,) = [e for e in m.edges if e.target == "error"]
        assert e.guard == conj(ineq("x", ">", 1))
        assert m.params == ()

    def test_parameter_free_identity(self):
        m = tiny(conj(ineq("x", "<", 2)), params=())
        assert valuate(m, {}) == m

    def test_arithmetic(self):
        m = valuate(tiny(conj(ineq("x", "<=", 1, p=2))), {"p": 3})
        assert m.edges[0].guard == conj(ineq("x", "<=", 7))

    @pytest.mark.parametrize("v", [{}, {"p": -1}, {"p": 1.5}])
    def test_rejects_bad_valuations(self, v):
        with pytest.raises(ModelError):
            valuate(tiny(), v)


class TestEvalConstraint:
    def test_non_strict_boundary(self):
        assert eval_constraint(conj(ineq("x", ">=", 1)), {"x": 1})

    def test_strict_boundary(self):
        assert not eval_constraint(conj(ineq("x", ">", p=1)), {"x": 1}, {"p": 1})

    def test_true(self):
        assert eval_constraint(TRUE, {"x": Fraction(7, 3)}, {"p": 0})

    def test_unknown_clock(self):
        with pytest.raises(ModelError):
            eval_constraint(conj(ineq("y", "<", 1)), {"x": 0})

    @given(st.fractions(0, 10), st.integers(0, 10), st.sampled_from(["<", "<=", "=", ">=", ">"]))
    def test_matches_python_comparison(self, value, c, rel):
        ops = {"<": value < c, "<=": value <= c, "=": value == c, ">=": value >= c, ">": value > c}
        assert eval_constraint(conj(ineq("x", rel, c)), {"x": value}) == ops[rel]


class TestReset:
    def test_reset_one(self):
        assert reset({"x": 3}, {"x"}) == {"x": 0}

    def test_reset_none(self):
        assert reset({"x": 3}, ()) == {"x": 3}

    def test_reset_second(self):
        assert reset({"x": 3, "y": 5}, {"y"}) == {"x": 3, "y": 0}


def test_true_invariants_are_dropped():
    m = tiny(invariants={"a": Constraint(), "b": conj(ineq("x", "<=", 1))})
    assert set(m.invariants) == {"b"}
    assert m.invariant("a").is_true


def test_max_constant():
    assert build_async_read().max_constant() == 4
