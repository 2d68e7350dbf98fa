from __future__ import annotations

import pytest

from pdtn.library import build_async_read
from pdtn.model import Edge, GuardedPTA, ModelError, conj, ineq, valuate
from pdtn.regions import OracleStatus, region_reach_oracle
from pdtn.textfmt import parse_property

ASYNC_READ = valuate(build_async_read(), {"p": 1})


def test_error_with_three():
    assert region_reach_oracle(ASYNC_READ, 3, "error") is OracleStatus.REACHABLE


def test_error_with_one():
    assert region_reach_oracle(ASYNC_READ, 1, "error") is OracleStatus.UNREACHABLE


def test_initial_goal():
    assert region_reach_oracle(ASYNC_READ, 2, "init") is OracleStatus.REACHABLE


def test_global_property():
    phi = parse_property("#error >= 1 & #init = 0 & #listen = 0 & #post = 0 & #reading = 0 & #done = 0")
    assert region_reach_oracle(ASYNC_READ, 2, phi) is OracleStatus.UNREACHABLE


def test_budget():
    assert region_reach_oracle(ASYNC_READ, 3, "error", state_budget=10) is OracleStatus.BUDGET_EXCEEDED


def test_fractional_timing():
    # b is entered with 1 < x < 2 and y reset, so y < 1 when x reaches 2
    m = GuardedPTA(
        "m", ("a", "b", "c"), "a", ("x", "y"),
        edges=(
            Edge("a", "b", guard=conj(ineq("x", ">", 1), ineq("x", "<", 2)), resets={"y"}),
            Edge("b", "c", guard=conj(ineq("x", "=", 2), ineq("y", "<", 1))),
        ),
    )
    assert region_reach_oracle(m, 1, "c") is OracleStatus.REACHABLE
    strict = GuardedPTA("m", m.locations, "a", m.clocks, edges=(m.edges[0], Edge("b", "c", guard=conj(ineq("x", "=", 2), ineq("y", ">", 1)))))
    assert region_reach_oracle(strict, 1, "c") is OracleStatus.UNREACHABLE


def test_requires_valuated_model():
    with pytest.raises(ModelError):
        region_reach_oracle(build_async_read(), 1, "error")
