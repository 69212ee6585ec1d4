"""Shared generators and reference implementations for the test suite."""

from __future__ import annotations

import itertools
import json
import random
from fractions import Fraction

from hypothesis import strategies as st

from opaque_plan import FACTORY
from opaque_plan.ltl import LassoWord, parse
from opaque_plan.model import WTS, from_document

PROPS = ("p", "q")
WEIGHTS = (Fraction(1), Fraction(2), Fraction(3), Fraction(1, 2))

# the randomized suites use these; each is over at most two propositions
SUITE_FORMULAS = (
    "GF p && GF q",
    "F p",
    "G !q",
    "p U q",
    "FG p",
    "G (p -> F q)",
    "GF p",
    "X X q",
    "true",
)

# translation corpus: every shape the automaton must get right
CORPUS = (
    "true",
    "false",
    "p",
    "!p",
    "X p",
    "X X X p",
    "X !X q",
    "F p",
    "G p",
    "GF p",
    "FG p",
    "GF p && GF q",
    "FG p || GF q",
    "p U q",
    "p R q",
    "!(p U q)",
    "(p U q) U p",
    "p U (q U p)",
    "G (p -> F q)",
    "G (p -> X q)",
    "F (p && X X q)",
    "G F p -> G F q",
    "p && !p",
    "p || !p",
    "X (p U X q)",
    "G (p || X G q)",
    "F G (p && !q)",
    "(G p) U (F q)",
    "!G F p",
    "p R (q || X p)",
    "G (q -> X X !q)",
    "F p && F !p && G (p -> X p)",
    "X X X (p U q)",
    "(p U q) && (q R p)",
)


def factory_doc() -> dict:
    return json.loads(FACTORY.read_text(encoding="utf-8"), parse_float=Fraction)


def factory(drop: tuple[str, str] | None = None) -> WTS:
    """The case-study model, optionally without one bidirectional edge."""
    doc = factory_doc()
    if drop:
        doc["transitions"] = [
            tr for tr in doc["transitions"] if {tr["from"], tr["to"]} != set(drop)
        ]
    return from_document(doc)


def random_model(
    rng: random.Random, max_states: int = 6, max_outputs: int = 3, density: float = 0.4
) -> WTS:
    n = rng.randint(1, max_states)
    names = [f"s{i}" for i in range(n)]
    outs = ["o0", "o1", "o2"][: rng.randint(1, max_outputs)]
    states = [
        {
            "name": s,
            "label": [p for p in PROPS if rng.random() < 0.35],
            "output": rng.choice(outs),
        }
        for s in names
    ]
    trs = [
        {"from": u, "to": v, "weight": rng.choice(WEIGHTS)}
        for u in names
        for v in names
        if rng.random() < density
    ]
    init = [s for s in names if rng.random() < 0.6] or [names[0]]
    secret = [s for s in init if rng.random() < 0.5]
    return from_document({"states": states, "initial": init, "secret": secret, "transitions": trs})


@st.composite
def models(draw, max_states: int = 5, max_outputs: int = 3) -> WTS:
    seed = draw(st.integers(0, 2**32 - 1))
    return random_model(random.Random(seed), max_states, max_outputs)


letters = st.frozensets(st.sampled_from(PROPS))
lassos = st.builds(
    LassoWord,
    st.lists(letters, max_size=3).map(tuple),
    st.lists(letters, min_size=1, max_size=3).map(tuple),
)


def formulas(max_leaves: int = 6):
    leaf = st.sampled_from(["p", "q", "true", "false"]).map(parse)

    def extend(children):
        unary = st.tuples(st.sampled_from(["!", "X", "F", "G"]), children).map(
            lambda t: parse(f"{t[0]} ({t[1]})")
        )
        binary = st.tuples(children, st.sampled_from(["&&", "||", "U", "R", "->"]), children).map(
            lambda t: parse(f"({t[0]}) {t[1]} ({t[2]})")
        )
        return unary | binary

    return st.recursive(leaf, extend, max_leaves=max_leaves)


def all_lassos(max_prefix: int = 3, max_loop: int = 3, props=PROPS):
    alphabet = [frozenset(c) for r in range(len(props) + 1) for c in itertools.combinations(props, r)]
    for k in range(max_prefix + 1):
        for pre in itertools.product(alphabet, repeat=k):
            for m in range(1, max_loop + 1):
                for loop in itertools.product(alphabet, repeat=m):
                    yield LassoWord(pre, loop)


def bellman_ford(n: int, edges: list[tuple[int, int, int]], src: int) -> dict[int, int]:
    dist = {src: 0}
    for _ in range(n - 1):
        changed = False
        for u, v, w in edges:
            if u in dist and (v not in dist or dist[u] + w < dist[v]):
                dist[v] = dist[u] + w
                changed = True
        if not changed:
            break
    return dist
