"""Bundled example models and machines."""

from __future__ import annotations

from importlib import resources

from .model import Edge, GuardedPTA, conj, ineq
from .textfmt import MachineProgram, parse_machine, parse_model


def build_async_read() -> GuardedPTA:
    """Six-location data-read model: one clock ``x``, one parameter ``p``."""
    x = "x"
    edges = (
        Edge("init", "listen", "a0", conj(ineq(x, ">=", 1))),
        Edge("listen", "post", "a1", conj(ineq(x, "=", 4)), resets={x}),
        Edge("post", "init", "a2"),
        Edge("init", "reading", "a3", locguard="post", resets={x}),
        Edge("reading", "post", "a4", conj(ineq(x, ">=", 2)), resets={x}),
        Edge("reading", "done", "a5", conj(ineq(x, ">=", 1))),
        Edge("reading", "error", "a6", conj(ineq(x, ">", 0, p=1)), locguard="done"),
        Edge("done", "init", "a7"),
    )
    return GuardedPTA(
        name="async_read",
        locations=("init", "listen", "post", "reading", "done", "error"),
        initial="init",
        clocks=(x,),
        params=("p",),
        invariants={"reading": conj(ineq(x, "<=", 2)), "done": conj(ineq(x, "<=", 1))},
        edges=edges,
    )


def data_path(name: str):
    return resources.files("pdtn") / "data" / name


def load_async_read() -> GuardedPTA:
    return parse_model(data_path("async_read.pdtn.json").read_text())


def machine_names() -> list[str]:
    folder = resources.files("pdtn") / "data" / "machines"
    return sorted(p.name[:-4] for p in folder.iterdir() if p.name.endswith(".2cm"))


def load_machine(name: str) -> MachineProgram:
    return parse_machine(data_path(f"machines/{name}.2cm").read_text())
