from __future__ import annotations

import random

from pdtn.corpus import corpus, lower_or_equal
from pdtn.library import build_async_read, load_async_read, load_machine, machine_names
from pdtn.model import classify, lu_partition, validate


def test_bundled_model_matches_builder():
    assert load_async_read() == build_async_read()


def test_machines_load():
    names = machine_names()
    assert "count3" in names and names == sorted(names)
    for name in names:
        load_machine(name)


def test_corpus_is_seeded():
    assert corpus("valuated", 5, seed=1) == corpus("valuated", 5, seed=1)
    assert corpus("valuated", 5, seed=1) != corpus("valuated", 5, seed=2)


def test_corpus_classes():
    for m in corpus("valuated", 30, seed=3):
        assert validate(m) == [] and not m.params
    for m in corpus("fully_parametric", 30, seed=3):
        r = classify(m)
        assert r.fully_parametric and r.param_count == 1 and not r.has_invariants
    for m in corpus("lu", 30, seed=3, invariants=True):
        assert lu_partition(m) is not None
    for m in corpus("parametric", 30, seed=3):
        assert validate(m) == []


def test_lower_or_equal():
    rng = random.Random(0)
    for _ in range(50):
        w = lower_or_equal(rng, {"pl": 2, "pu": 1}, ("pl",), ("pu",))
        assert 0 <= w["pl"] <= 2 and w["pu"] >= 1
