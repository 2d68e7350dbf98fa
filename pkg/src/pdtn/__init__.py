"""Parametric disjunctive timed networks: models, semantics, zone-based
reachability, parametrised emptiness procedures and two-counter-machine
encodings."""

from .model import (
    ClassReport,
    Constraint,
    Edge,
    GuardedPTA,
    Inequality,
    LinearExpr,
    ModelError,
    classify,
    conj,
    eval_constraint,
    ineq,
    reset,
    validate,
    valuate,
)
from .textfmt import ParseError, parse_machine, parse_model, parse_property, serialize_model

__version__ = "0.1.0"

__all__ = [
    "ClassReport",
    "Constraint",
    "Edge",
    "GuardedPTA",
    "Inequality",
    "LinearExpr",
    "ModelError",
    "ParseError",
    "classify",
    "conj",
    "eval_constraint",
    "ineq",
    "parse_machine",
    "parse_model",
    "parse_property",
    "reset",
    "serialize_model",
    "validate",
    "valuate",
]
