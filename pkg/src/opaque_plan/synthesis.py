"""Twin-WTS and its product with the task automaton."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .buchi import NBA
from .graphs import Digraph, nodes_on_cycles
from .model import WTS

TwinState = tuple[str, str]
ProductState = tuple[TwinState, int]


@dataclass(eq=False)
class TwinWTS:
    """Pairs of states with equal outputs, moving in lockstep.

    The first component is the real robot, the second an observationally
    equivalent copy; weights and labels are read off the first component.
    """

    source: WTS
    graph: Digraph
    initial: list[int]

    @property
    def states(self) -> list[TwinState]:
        return self.graph.nodes

    def label(self, x: TwinState) -> frozenset[str]:
        return self.source.labels[x[0]]


@dataclass(eq=False)
class Product:
    twin: TwinWTS
    nba: NBA
    graph: Digraph
    initial: list[int]

    @property
    def states(self) -> list[ProductState]:
        return self.graph.nodes

    @cached_property
    def on_cycle(self) -> set[int]:
        return nodes_on_cycles(self.graph.adj)


def build_twin(t: WTS, diagonal: bool = False, full: bool = False) -> TwinWTS:
    """Reachable fragment of the twin-WTS of ``t``.

    ``diagonal`` keeps only pairs ``(q, q)``, which turns the twin into a copy
    of ``t`` and so disables the security constraint.  ``full`` seeds the
    construction with every output-consistent pair instead of just the
    initial ones.
    """
    H = t.outputs
    g = Digraph(scale=t.scale)
    seeds = t.states if full else [s for s in t.states if s in t.initial]
    for q1 in seeds:
        for q2 in seeds:
            if H[q1] == H[q2] and (q1 == q2 or not diagonal):
                g.add_node((q1, q2))
    initial = [
        g.index[(a, b)]
        for a in t.states
        for b in t.states
        if a in t.initial and b in t.initial and (a, b) in g.index
    ]
    i = 0
    while i < len(g.nodes):
        q1, q2 = g.nodes[i]
        for n1 in t.succ[q1]:
            w = int(t.weights[q1, n1] * t.scale)
            if diagonal:
                candidates: Iterable[str] = (n1,) if n1 in t.succ[q2] else ()
            else:
                candidates = t.succ[q2]
            for n2 in candidates:
                if H[n1] == H[n2]:
                    g.add_edge(i, g.add_node((n1, n2)), w)
        i += 1
    n = len(t.states)
    if len(g) > n * n:
        raise AssertionError(f"twin has {len(g)} states, bound is {n * n}")
    return TwinWTS(t, g, initial)


def build_product(v: TwinWTS, b: NBA) -> Product:
    """Reachable fragment of the product of the twin with ``b``.

    A twin move from ``x`` pairs with an automaton move whose guard accepts
    the label of ``x``, i.e. of the state being left.
    """
    # propositions no state carries are never true; they need no special case
    g = Digraph(scale=v.graph.scale)
    tg = v.graph
    q0b = sorted(b.initial)
    for xi in v.initial:
        for qb in q0b:
            g.add_node((tg.nodes[xi], qb))
    initial = list(range(len(g)))
    step_cache: dict[tuple[int, frozenset[str]], list[int]] = {}
    i = 0
    while i < len(g.nodes):
        x, qb = g.nodes[i]
        letter = v.label(x)
        key = (qb, letter)
        succ_b = step_cache.get(key)
        if succ_b is None:
            succ_b = step_cache[key] = b.step(qb, letter)
        if succ_b:
            for xj, w in tg.adj[tg.index[x]]:
                x2 = tg.nodes[xj]
                for qb2 in succ_b:
                    g.add_edge(i, g.add_node((x2, qb2)), w)
        i += 1
    bound = len(v.source.states) ** 2 * len(b.states)
    if len(g) > bound:
        raise AssertionError(f"product has {len(g)} states, bound is {bound}")
    return Product(v, b, g, initial)


def initial_set(p: Product, q0: str, t: WTS) -> set[ProductState]:
    """Initial product states whose real component starts at ``q0`` and whose
    copy starts from a non-secret state."""
    if q0 not in t.initial:
        raise ValueError(f"{q0!r} is not an initial state")
    return {p.graph.nodes[i] for i in initial_ids(p, q0, t)}


def initial_ids(p: Product, q0: str, t: WTS) -> list[int]:
    return [
        i
        for i in p.initial
        if p.graph.nodes[i][0][0] == q0 and p.graph.nodes[i][0][1] not in t.secret
    ]


def goal_set(p: Product, b: NBA | None = None) -> set[ProductState]:
    """Product states with an accepting automaton component lying on a cycle."""
    return {p.graph.nodes[i] for i in goal_ids(p, b)}


def goal_ids(p: Product, b: NBA | None = None) -> set[int]:
    acc = (b or p.nba).accepting
    return {i for i in p.on_cycle if p.graph.nodes[i][1] in acc}


def project(pp: Sequence[ProductState]) -> list[str]:
    """Real-robot path under a product path."""
    return [x[0] for x, _ in pp]


def project_witness(pp: Sequence[ProductState]) -> list[str]:
    """Observationally equivalent copy's path under a product path."""
    return [x[1] for x, _ in pp]


def twin_name(x: TwinState) -> str:
    return f"({x[0]},{x[1]})"


def product_name(s: ProductState) -> str:
    return f"({twin_name(s[0])},q{s[1]})"


def to_dot(g: Digraph, initial: Sequence[int], name: str, label=str) -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    init = set(initial)
    for i, node in enumerate(g.nodes):
        extra = ", style=bold" if i in init else ""
        lines.append(f'  "{label(node)}" [shape=box{extra}];')
    for i, edges in enumerate(g.adj):
        for j, w in edges:
            cost = g.real(w)
            lines.append(f'  "{label(g.nodes[i])}" -> "{label(g.nodes[j])}" [label="{cost}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
