"""Command-line front end: plan, verify, export, gridgen.

Exit codes: 0 success, 1 input error, 2 infeasible, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import buchi, synthesis
from .ltl import Formula, ParseError, parse
from .model import WTS, ModelError, Plan, json_number, load, schema_error
from .oracle import verify
from .planner import plan as synthesize
from .planner import to_document

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_VERIFY = 0, 1, 2, 3


class InputError(Exception):
    """Bad user input; the message already carries its location."""


PLAN_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["prefix", "cycle"],
    "properties": {
        "initial": {"type": "string"},
        "prefix": {"type": "array", "items": {"type": "string"}},
        "cycle": {"type": "array", "items": {"type": "string"}, "minItems": 1},
    },
}

_CELL = {
    "oneOf": [
        {"type": "string", "pattern": "^r[0-9]+c[0-9]+$"},
        {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2},
    ]
}

GRID_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["rows", "cols", "initial"],
    "additionalProperties": False,
    "properties": {
        "rows": {"type": "integer", "minimum": 1},
        "cols": {"type": "integer", "minimum": 1},
        "obstacles": {"type": "array", "items": _CELL},
        "classes": {"type": "object", "additionalProperties": {"type": "array", "items": _CELL}},
        "outputs": {"type": "object", "additionalProperties": {"type": "string"}},
        "labels": {
            "type": "object",
            "additionalProperties": {"type": "array", "items": {"type": "string", "minLength": 1}},
        },
        "initial": {"type": "array", "items": _CELL, "minItems": 1},
        "secret": {"type": "array", "items": _CELL},
        "move_cost": {"type": "number", "exclusiveMinimum": 0},
        "enter_cost": {
            "type": "object",
            "additionalProperties": {"type": "number", "exclusiveMinimum": 0},
        },
    },
}


# -- input helpers -----------------------------------------------------------


def _read_json(path: str, what: str) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot read {what}: {exc.strerror}") from exc
    try:
        return json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def _model(path: str) -> WTS:
    try:
        return load(Path(path))
    except ModelError as exc:
        msg = str(exc)
        raise InputError(msg if msg.startswith(path) else f"{path}: {msg}") from exc


def _formula(text: str) -> Formula:
    try:
        return parse(text)
    except ParseError as exc:
        caret = " " * exc.offset + "^"
        raise InputError(f"formula:1:{exc.offset + 1}: {exc}\n  {text}\n  {caret}") from exc


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{out}: cannot write: {exc.strerror}") from exc


def _dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _require(args: argparse.Namespace, *names: str) -> None:
    for n in names:
        if getattr(args, n) is None:
            raise InputError(f"export {args.what}: --{n} is required")


# -- commands ----------------------------------------------------------------


def cmd_plan(args: argparse.Namespace) -> int:
    t = _model(args.model)
    f = _formula(args.formula)
    if args.init not in t.initial:
        known = "unknown state" if args.init not in t.order else "not an initial state"
        raise InputError(f"{args.model}: --init {args.init!r}: {known}")
    try:
        alpha = Fraction(args.alpha)
        result = synthesize(t, f, args.init, alpha)
    except ValueError as exc:
        raise InputError(f"--alpha {args.alpha}: {exc}") from exc
    _emit(_dumps(to_document(result)), args.out)
    if not result.feasible:
        print(result.message, file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    t = _model(args.model)
    f = _formula(args.formula)
    doc = _read_json(args.plan, "plan")
    err = schema_error(PLAN_SCHEMA, doc)
    if err:
        raise InputError(f"{args.plan}: {err}")
    p = Plan(tuple(doc["prefix"]), tuple(doc["cycle"]))
    if "initial" in doc and doc["initial"] != p.start:
        raise InputError(f"{args.plan}: initial {doc['initial']!r} does not start the plan")
    try:
        verdict = verify(t, p, f)
    except ModelError as exc:
        raise InputError(f"{args.plan}: {exc}") from exc
    _emit(_dumps(verdict), args.out)
    return EXIT_OK if verdict["secure"] and verdict["satisfies"] else EXIT_VERIFY


def cmd_export(args: argparse.Namespace) -> int:
    what = args.what
    if what == "nba":
        _require(args, "formula")
        text = buchi.to_dot(buchi.translate(_formula(args.formula)))
    else:
        _require(args, "model")
        t = _model(args.model)
        if what == "wts":
            text = synthesis.to_dot(t.graph, t.graph.ids(s for s in t.states if s in t.initial), "wts")
        elif what == "twin":
            v = synthesis.build_twin(t)
            text = synthesis.to_dot(v.graph, v.initial, "twin", synthesis.twin_name)
        else:
            _require(args, "formula")
            p = synthesis.build_product(synthesis.build_twin(t), buchi.translate(_formula(args.formula)))
            text = synthesis.to_dot(p.graph, p.initial, "product", synthesis.product_name)
    _emit(text, args.out)
    return EXIT_OK


def cmd_gridgen(args: argparse.Namespace) -> int:
    spec = _read_json(args.spec, "grid spec")
    err = schema_error(GRID_SCHEMA, spec)
    if err:
        raise InputError(f"{args.spec}: {err}")
    try:
        doc = grid_model(spec)
    except ValueError as exc:
        raise InputError(f"{args.spec}: {exc}") from exc
    _emit(_dumps(doc), args.out)
    return EXIT_OK


# -- grid worlds -------------------------------------------------------------


def cell_name(r: int, c: int) -> str:
    return f"r{r}c{c}"


def grid_model(spec: dict[str, Any]) -> dict[str, Any]:
    """Model document for a 4-connected grid; both directions of every
    adjacency are listed, weighted by the cost of entering the target."""
    rows, cols = spec["rows"], spec["cols"]

    def cell(x: Any, where: str) -> str:
        if isinstance(x, str):
            r, c = (int(v) for v in x[1:].split("c"))
        else:
            r, c = x
        if not (0 <= r < rows and 0 <= c < cols):
            raise ValueError(f"{where}: cell {cell_name(r, c)} lies outside the {rows}x{cols} grid")
        return cell_name(r, c)

    def cells(key: str) -> list[str]:
        return [cell(x, f"{key}/{i}") for i, x in enumerate(spec.get(key, ()))]

    blocked = set(cells("obstacles"))
    initial, secret = cells("initial"), cells("secret")
    if not set(secret) <= set(initial):
        raise ValueError(f"secret cells {sorted(set(secret) - set(initial))} are not initial")
    if blocked & set(initial):
        raise ValueError(f"obstacle cells {sorted(blocked & set(initial))} cannot be initial")

    cls: dict[str, str] = {}
    for name, members in spec.get("classes", {}).items():
        for i, x in enumerate(members):
            c = cell(x, f"classes/{name}/{i}")
            if c in cls and cls[c] != name:
                raise ValueError(f"cell {c} belongs to classes {cls[c]!r} and {name!r}")
            cls[c] = name
    outputs = spec.get("outputs", {})
    labels = {cell(k, f"labels/{k}"): v for k, v in spec.get("labels", {}).items()}
    for c in labels:
        if c in blocked:
            raise ValueError(f"labelled cell {c} is an obstacle")
    enter = {cell(k, f"enter_cost/{k}"): Fraction(v) for k, v in spec.get("enter_cost", {}).items()}
    default_cost = Fraction(spec.get("move_cost", 1))

    states, transitions = [], []
    for r in range(rows):
        for c in range(cols):
            name = cell_name(r, c)
            if name in blocked:
                continue
            kind = cls.get(name, "default")
            if kind not in outputs:
                raise ValueError(f"no output symbol for class {kind!r} (cell {name})")
            states.append({"name": name, "label": sorted(set(labels.get(name, ()))), "output": outputs[kind]})
            for dr, dc in ((-1, 0), (0, -1), (0, 1), (1, 0)):
                r2, c2 = r + dr, c + dc
                nb = cell_name(r2, c2)
                if 0 <= r2 < rows and 0 <= c2 < cols and nb not in blocked:
                    w = enter.get(nb, default_cost)
                    transitions.append({"from": name, "to": nb, "weight": json_number(w)})
    return {
        "states": states,
        "initial": sorted(set(initial), key=_rc),
        "secret": sorted(set(secret), key=_rc),
        "transitions": transitions,
    }


def _rc(name: str) -> tuple[int, int]:
    r, c = name[1:].split("c")
    return int(r), int(c)


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="opaque-plan", description="Secure minimum-cost LTL planning on weighted transition systems."
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="synthesize a secure optimal plan")
    p.add_argument("-m", "--model", required=True)
    p.add_argument("-f", "--formula", required=True)
    p.add_argument("-i", "--init", required=True)
    p.add_argument("--alpha", default="0.5", help="prefix weight in [0, 1] (default 0.5)")
    p.add_argument("-o", "--out")
    p.set_defaults(run=cmd_plan)

    v = sub.add_parser("verify", help="check a plan for security and satisfaction")
    v.add_argument("-m", "--model", required=True)
    v.add_argument("-p", "--plan", required=True)
    v.add_argument("-f", "--formula", required=True)
    v.add_argument("-o", "--out")
    v.set_defaults(run=cmd_verify)

    e = sub.add_parser("export", help="write a structure as Graphviz DOT")
    e.add_argument("what", choices=["wts", "nba", "twin", "product"])
    e.add_argument("-m", "--model")
    e.add_argument("-f", "--formula")
    e.add_argument("-o", "--out")
    e.set_defaults(run=cmd_export)

    g = sub.add_parser("gridgen", help="generate a grid-world model")
    g.add_argument("spec")
    g.add_argument("-o", "--out")
    g.set_defaults(run=cmd_gridgen)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.run(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
