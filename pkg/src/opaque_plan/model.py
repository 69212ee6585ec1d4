"""Weighted transition systems with labels, outputs and secret initial states."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Hashable, Iterable, Mapping, Sequence

import jsonschema

from .graphs import Digraph, common_scale, nodes_on_cycles, reachable
from .ltl import LassoWord


class ModelError(ValueError):
    """Raised for model documents that violate the schema or WTS invariants."""


MODEL_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["states", "initial", "transitions"],
    "additionalProperties": False,
    "properties": {
        "states": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "output"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "label": {"type": "array", "items": {"type": "string", "minLength": 1}},
                    "output": {"type": "string"},
                },
            },
        },
        "initial": {"type": "array", "items": {"type": "string"}},
        "secret": {"type": "array", "items": {"type": "string"}},
        "transitions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["from", "to", "weight"],
                "additionalProperties": False,
                "properties": {
                    "from": {"type": "string"},
                    "to": {"type": "string"},
                    "weight": {"type": "number"},
                },
            },
        },
        "bidirectional": {"type": "boolean"},
    },
}


@dataclass(frozen=True, eq=False)
class WTS:
    """A WTS extended with an output map ``H`` and secret initial states.

    ``states`` keeps document order; that order fixes every iteration order
    downstream, which is what makes planning output reproducible.
    """

    states: tuple[str, ...]
    initial: frozenset[str]
    weights: Mapping[tuple[str, str], Fraction]
    labels: Mapping[str, frozenset[str]]
    outputs: Mapping[str, str]
    secret: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        names = set(self.states)
        if len(names) != len(self.states):
            dup = next(s for s in self.states if self.states.count(s) > 1)
            raise ModelError(f"duplicate state {dup!r}")
        if not self.initial <= names:
            raise ModelError(f"unknown initial states {sorted(self.initial - names)}")
        if not self.secret <= self.initial:
            raise ModelError(f"secret states {sorted(self.secret - self.initial)} are not initial")
        for (u, v), w in self.weights.items():
            if u not in names or v not in names:
                raise ModelError(f"transition {u}->{v} references an unknown state")
            if w <= 0:
                raise ModelError(f"weight <= 0 on transition {u}->{v}")
        for attr in ("labels", "outputs"):
            missing = names - set(getattr(self, attr))
            if missing:
                raise ModelError(f"{attr} undefined for {sorted(missing)}")

    @cached_property
    def order(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def succ(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {s: [] for s in self.states}
        for u, v in self.weights:
            out[u].append(v)
        return {s: tuple(sorted(vs, key=self.order.__getitem__)) for s, vs in out.items()}

    @cached_property
    def props(self) -> frozenset[str]:
        return frozenset().union(*self.labels.values())

    @cached_property
    def output_symbols(self) -> frozenset[str]:
        return frozenset(self.outputs.values())

    @cached_property
    def scale(self) -> int:
        return common_scale(self.weights.values())

    @cached_property
    def graph(self) -> Digraph:
        g = Digraph(scale=self.scale)
        for s in self.states:
            g.add_node(s)
        for s in self.states:
            for v in self.succ[s]:
                g.add_edge(g.index[s], g.index[v], int(self.weights[s, v] * self.scale))
        return g

    def has_edge(self, u: str, v: str) -> bool:
        return (u, v) in self.weights


@dataclass(frozen=True)
class Plan:
    """The infinite path ``prefix . cycle^omega``.

    ``prefix`` may be empty, in which case the path starts on ``cycle[0]``.
    The edge closing the cycle (last state back to first) is implicit.
    """

    prefix: tuple[str, ...]
    cycle: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "cycle", tuple(self.cycle))
        if not self.cycle:
            raise ValueError("plan cycle must be nonempty")

    @property
    def start(self) -> str:
        return self.prefix[0] if self.prefix else self.cycle[0]

    def entry_path(self) -> tuple[str, ...]:
        """Prefix together with the first cycle state."""
        return self.prefix + self.cycle[:1]

    def loop_path(self) -> tuple[str, ...]:
        """Cycle together with its closing return to the first cycle state."""
        return self.cycle + self.cycle[:1]

    def canonical(self) -> "Plan":
        """Same infinite path, shortest prefix and primitive cycle.

        Every other decomposition of the path lengthens the prefix or repeats
        the cycle, so with positive weights this one has the least cost.
        """
        prefix, cycle = list(self.prefix), list(self.cycle)
        m = len(cycle)
        for d in range(1, m + 1):
            if m % d == 0 and cycle == cycle[:d] * (m // d):
                cycle = cycle[:d]
                break
        while prefix and prefix[-1] == cycle[-1]:
            prefix.pop()
            cycle = cycle[-1:] + cycle[:-1]
        return Plan(tuple(prefix), tuple(cycle))

    def __str__(self) -> str:
        sep = "" if all(len(s) == 1 for s in self.prefix + self.cycle) else " "
        return f"{sep.join(self.prefix)}({sep.join(self.cycle)})^w"


# -- loading -----------------------------------------------------------------


def load(doc: Mapping[str, Any] | str | Path) -> WTS:
    """Build a WTS from a model document (mapping, JSON text or file path)."""
    if isinstance(doc, Path) or (isinstance(doc, str) and not doc.lstrip().startswith("{")):
        path = Path(doc)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ModelError(f"{path}: {exc.strerror}") from exc
        try:
            doc = json.loads(text, parse_float=Fraction)
        except json.JSONDecodeError as exc:
            raise ModelError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    elif isinstance(doc, str):
        try:
            doc = json.loads(doc, parse_float=Fraction)
        except json.JSONDecodeError as exc:
            raise ModelError(f"line {exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return from_document(doc)


_Validator = jsonschema.validators.extend(
    jsonschema.Draft7Validator,
    # JSON floats arrive as Fraction (parse_float=Fraction)
    type_checker=jsonschema.Draft7Validator.TYPE_CHECKER.redefine(
        "number",
        lambda _, x: isinstance(x, (int, float, Fraction)) and not isinstance(x, bool),
    ),
)


def schema_error(schema: Mapping[str, Any], doc: Any) -> str | None:
    err = jsonschema.exceptions.best_match(_Validator(schema).iter_errors(doc))
    if err is None:
        return None
    where = "/".join(str(p) for p in err.absolute_path) or "<root>"
    return f"schema violation at {where}: {err.message}"


def _schema_check(doc: Any) -> None:
    msg = schema_error(MODEL_SCHEMA, doc)
    if msg:
        raise ModelError(msg)


def from_document(doc: Mapping[str, Any]) -> WTS:
    _schema_check(doc)
    states: list[str] = []
    labels: dict[str, frozenset[str]] = {}
    outputs: dict[str, str] = {}
    for i, st in enumerate(doc["states"]):
        name = st["name"]
        if name in labels:
            raise ModelError(f"duplicate state {name!r} at states/{i}")
        states.append(name)
        labels[name] = frozenset(st.get("label", ()))
        outputs[name] = st["output"]
    known = set(states)

    def ref(name: str, where: str) -> str:
        if name not in known:
            raise ModelError(f"unknown state {name!r} at {where}")
        return name

    initial = frozenset(ref(s, f"initial/{i}") for i, s in enumerate(doc["initial"]))
    secret = frozenset(ref(s, f"secret/{i}") for i, s in enumerate(doc.get("secret", ())))
    if not secret <= initial:
        raise ModelError(f"secret states {sorted(secret - initial)} are not initial (QS must be a subset of Q0)")
    both = bool(doc.get("bidirectional", False))
    weights: dict[tuple[str, str], Fraction] = {}
    for i, tr in enumerate(doc["transitions"]):
        u = ref(tr["from"], f"transitions/{i}/from")
        v = ref(tr["to"], f"transitions/{i}/to")
        w = Fraction(tr["weight"])
        if w <= 0:
            raise ModelError(f"weight <= 0 at transitions/{i} ({u}->{v})")
        pairs = [(u, v), (v, u)] if both else [(u, v)]
        for e in pairs:
            if e in weights and weights[e] != w:
                raise ModelError(f"conflicting weights for {e[0]}->{e[1]} at transitions/{i}")
            weights[e] = w
    return WTS(tuple(states), initial, weights, labels, outputs, secret)


def to_document(t: WTS) -> dict[str, Any]:
    return {
        "states": [
            {"name": s, "label": sorted(t.labels[s]), "output": t.outputs[s]} for s in t.states
        ],
        "initial": [s for s in t.states if s in t.initial],
        "secret": [s for s in t.states if s in t.secret],
        "transitions": [
            {"from": u, "to": v, "weight": json_number(t.weights[u, v])}
            for u in t.states
            for v in t.succ[u]
        ],
    }


def json_number(x: Fraction) -> int | float:
    return x.numerator if x.denominator == 1 else float(x)


# -- paths -------------------------------------------------------------------


def check_path(t: WTS, path: Sequence[str]) -> None:
    for s in path:
        if s not in t.order:
            raise ModelError(f"unknown state {s!r} in path")
    for u, v in zip(path, path[1:]):
        if not t.has_edge(u, v):
            raise ModelError(f"no transition {u}->{v}")


def check_plan(t: WTS, plan: Plan) -> None:
    check_path(t, plan.entry_path())
    check_path(t, plan.loop_path())


def path_cost(t: WTS, path: Sequence[str]) -> Fraction:
    check_path(t, path)
    return sum((t.weights[u, v] for u, v in zip(path, path[1:])), Fraction(0))


def plan_costs(t: WTS, plan: Plan) -> tuple[Fraction, Fraction]:
    """Transient cost (prefix plus entry edge) and cycle cost (with closing edge)."""
    return path_cost(t, plan.entry_path()), path_cost(t, plan.loop_path())


def trace(t: WTS, p: Plan | Sequence[str]) -> LassoWord | list[frozenset[str]]:
    if isinstance(p, Plan):
        return LassoWord(tuple(t.labels[s] for s in p.prefix), tuple(t.labels[s] for s in p.cycle))
    return [t.labels[s] for s in p]


def observation(t: WTS, p: Plan | Sequence[str]) -> tuple[list[str], list[str]] | list[str]:
    if isinstance(p, Plan):
        return [t.outputs[s] for s in p.prefix], [t.outputs[s] for s in p.cycle]
    return [t.outputs[s] for s in p]


# -- graph queries -----------------------------------------------------------


def _digraph(g: Any) -> Digraph:
    return g if isinstance(g, Digraph) else g.graph


def reach(g: Any, sources: Iterable[Hashable]) -> set[Hashable]:
    """States reachable from ``sources`` (including them) in a WTS or derived graph."""
    dg = _digraph(g)
    return set(dg.names(reachable(dg.adj, dg.ids(sources))))


def cycle_states(g: Any) -> set[Hashable]:
    dg = _digraph(g)
    return set(dg.names(nodes_on_cycles(dg.adj)))
