"""Command-line front end: ``pdtn <command> ...``.

Every analytic command prints one JSON document on stdout and a short
summary on stderr. Exit codes: 0 answer computed, 2 bad input, 3 budget
exhausted outside a value, 4 zone engine and region oracle disagree.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .decide import Bounds, BudgetExhausted, ProblemInstance, solve
from .model import ModelError, classify, valuate
from .regions import OracleStatus, region_reach_oracle
from .semantics import simulate, trace_to_json
from .textfmt import AtLeastOne, ParseError, parse_machine, parse_model, parse_property, serialize_model
from .twocm import encode, halt_location, parse_encoding
from .zonereach import DEFAULT_BUDGET, ReachStatus, reach

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_BUDGET = 3
EXIT_ORACLE = 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def default_budget() -> int:
    raw = os.environ.get("PDTN_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise CliError(f"PDTN_BUDGET must be an integer, got {raw!r}") from None
    if value < 1:
        raise CliError("PDTN_BUDGET must be positive")
    return value


def _read_text(path: str) -> str:
    p = Path(path)
    if not p.exists():
        # fall back to the bundled examples, e.g. "async_read.pdtn.json" or "count3.2cm"
        from .library import data_path

        for bundled in (data_path(p.name), data_path("machines") / p.name):
            if bundled.is_file():
                return bundled.read_text()
        raise CliError(f"no such file: {path}")
    return p.read_text()


def _load_model(path: str):
    return parse_model(_read_text(path))


def _params(pairs) -> dict:
    v = {}
    for item in pairs or ():
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise CliError(f"--param expects NAME=INT, got {item!r}")
        try:
            v[name.strip()] = int(value)
        except ValueError:
            raise CliError(f"--param {name}: {value!r} is not an integer") from None
    return v


def _goal(args):
    if args.prop is not None:
        return parse_property(args.prop)
    return args.target


def _emit(doc) -> None:
    json.dump(doc, sys.stdout, indent=2, sort_keys=False)
    sys.stdout.write("\n")


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


# --------------------------------------------------------------------------
# commands


def cmd_classify(args) -> int:
    report = classify(_load_model(args.model))
    _emit(report.to_json())
    lu = report.lu_partition
    _say(f"{report.clock_count} clock(s), {report.param_count} parameter(s), "
         f"{'L/U' if lu is not None else 'not L/U'}, {'fully parametric' if report.fully_parametric else 'has constants'}, "
         f"{'with' if report.has_invariants else 'without'} invariants")
    return EXIT_OK


def cmd_reach(args) -> int:
    model = _load_model(args.model)
    v = _params(args.param)
    goal = _goal(args)
    budget = args.budget or default_budget()
    result = reach(model, v, args.n, goal, budget, symmetry=args.symmetry)
    doc = result.to_json()
    doc["n"] = args.n
    doc["valuation"] = v
    code = EXIT_OK
    if args.oracle:
        oracle = region_reach_oracle(valuate(model, v) if model.params else model, args.n, goal, budget)
        doc["oracle"] = oracle.value
        if oracle is not OracleStatus.BUDGET_EXCEEDED and result.status is not ReachStatus.BUDGET_EXCEEDED:
            if oracle.value != result.status.value:
                _say(f"internal error: zone engine says {result.status.value}, region oracle says {oracle.value}")
                code = EXIT_ORACLE
    if args.witness and result.witness is not None:
        Path(args.witness).write_text(json.dumps(
            {"model": model.name, "n": args.n, "valuation": v, "trace": trace_to_json(result.witness)}, indent=2) + "\n")
    _emit(doc)
    _say(f"{result.status.value} after {result.explored} symbolic states")
    return code


def cmd_check(args) -> int:
    model = _load_model(args.model)
    if args.mode == "pr-e" and args.prop is not None:
        raise CliError("pr-e takes --target LOC; use --mode pgr-e for --prop")
    target = _goal(args)
    if args.mode == "pgr-e" and isinstance(target, str):
        target = AtLeastOne(target)
    inst = ProblemInstance(model, args.mode, target)
    bounds = Bounds(args.bound_n, args.bound_p, args.budget or default_budget())
    verdict = solve(inst, bounds)
    _emit(verdict.to_json())
    extra = ""
    if verdict.valuation is not None:
        extra = f" at {verdict.valuation}, n={verdict.n}"
    _say(f"{verdict.answer.value} ({'exact' if verdict.exact else 'bounded'}, method {verdict.method}){extra}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    model = _load_model(args.model)
    trace = simulate(model, args.n, _params(args.param), args.steps, args.seed)
    _emit(trace_to_json(trace))
    _say(f"{len(trace)} steps")
    return EXIT_OK


def cmd_compile(args) -> int:
    machine = parse_machine(_read_text(args.machine))
    kind = parse_encoding(args.encoding, args.invariants)
    model, roles = encode(machine, kind)
    out = Path(args.output)
    out.write_text(serialize_model(model))
    stem = out.name[: -len(".pdtn.json")] if out.name.endswith(".pdtn.json") else out.name
    sidecar = out.with_name(stem + ".roles.json")
    sidecar.write_text(json.dumps(
        {loc: {"state": st, "role": role} for loc, (st, role) in roles.items()}, indent=2, sort_keys=True) + "\n")
    _emit({"model": str(out), "roles": str(sidecar), "halt": halt_location(machine, kind),
           "locations": len(model.locations), "edges": len(model.edges)})
    _say(f"wrote {out} ({len(model.locations)} locations, {len(model.edges)} edges)")
    return EXIT_OK


def cmd_fmt(args) -> int:
    sys.stdout.write(serialize_model(_load_model(args.model)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pdtn", description="Parametric disjunctive timed networks.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="syntactic subclass report")
    p.add_argument("model")
    p.set_defaults(func=cmd_classify)

    def goal_flags(p):
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--target", metavar="LOC")
        g.add_argument("--prop", metavar="PHI")

    p = sub.add_parser("reach", help="reachability for one valuation and network size")
    p.add_argument("model")
    goal_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--param", action="append", metavar="NAME=INT")
    p.add_argument("--witness", metavar="PATH")
    p.add_argument("--budget", type=int)
    p.add_argument("--oracle", action="store_true", help="cross-check with the region graph")
    p.add_argument("--symmetry", action="store_true", help="merge states equal up to process order")
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("check", help="parametrised reachability emptiness")
    p.add_argument("model")
    p.add_argument("--mode", choices=("pr-e", "pgr-e"), required=True)
    goal_flags(p)
    p.add_argument("--bound-n", type=int, default=4)
    p.add_argument("--bound-p", type=int, default=4)
    p.add_argument("--budget", type=int)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="random admissible run")
    p.add_argument("model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--param", action="append", metavar="NAME=INT")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compile-2cm", help="compile a two-counter machine")
    p.add_argument("machine")
    p.add_argument("--encoding", required=True, metavar="single|three|fixed:N")
    p.add_argument("--invariants", action="store_true")
    p.add_argument("-o", "--output", required=True, metavar="PATH")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("fmt", help="canonical re-serialization")
    p.add_argument("model")
    p.set_defaults(func=cmd_fmt)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        for flag in ("n", "budget", "bound_n"):
            value = getattr(args, flag, None)
            if value is not None and value < 1:
                raise CliError(f"--{flag.replace('_', '-')} must be positive")
        for flag in ("bound_p", "steps"):
            if getattr(args, flag, 0) < 0:
                raise CliError(f"--{flag.replace('_', '-')} must be non-negative")
        return args.func(args)
    except CliError as exc:
        _say(f"error: {exc}")
        return exc.code
    except ParseError as exc:
        _say(f"parse error: {exc}")
        return EXIT_INPUT
    except (ModelError, ValueError) as exc:
        _say(f"error: {exc}")
        return EXIT_INPUT
    except BudgetExhausted as exc:
        _say(f"error: {exc}")
        return EXIT_BUDGET
    except OSError as exc:
        _say(f"error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
