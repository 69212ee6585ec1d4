"""Büchi automata over proposition sets and LTL translation.

Translation follows the classic tableau construction of Gerth, Peled, Vardi
and Wolper: the NNF formula is expanded into nodes (covers), each Until
subformula contributes one acceptance set of the resulting generalized
automaton, and a counter construction turns that into a plain NBA.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable

from . import ltl
from .graphs import nodes_on_cycles, reachable, strongly_connected_components
from .ltl import Atom, Bottom, Formula, LassoWord, Not, Top


@dataclass(frozen=True, order=True)
class EdgeGuard:
    """Conjunction of literals; matches letters containing every positive
    proposition and none of the negative ones."""

    positive: frozenset[str] = frozenset()
    negative: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.positive & self.negative:
            raise ValueError(f"contradictory guard on {sorted(self.positive & self.negative)}")

    def matches(self, letter: Iterable[str]) -> bool:
        letter = letter if isinstance(letter, (set, frozenset)) else frozenset(letter)
        return self.positive <= letter and not (self.negative & letter)

    def __str__(self) -> str:
        lits = sorted([(p, p) for p in self.positive] + [(p, "!" + p) for p in self.negative])
        return " & ".join(s for _, s in lits) or "true"


TRUE_GUARD = EdgeGuard()


@dataclass(frozen=True)
class GBA:
    states: tuple[int, ...]
    initial: frozenset[int]
    transitions: tuple[tuple[int, EdgeGuard, int], ...]
    acceptance: tuple[frozenset[int], ...] = ()

    def __post_init__(self) -> None:
        _check_automaton(self.states, self.initial, self.transitions)
        for acc in self.acceptance:
            if not acc <= frozenset(self.states):
                raise ValueError("acceptance set mentions unknown states")


@dataclass(frozen=True)
class NBA:
    states: tuple[int, ...]
    initial: frozenset[int]
    transitions: tuple[tuple[int, EdgeGuard, int], ...]
    accepting: frozenset[int]

    def __post_init__(self) -> None:
        _check_automaton(self.states, self.initial, self.transitions)
        if not self.accepting <= frozenset(self.states):
            raise ValueError("accepting set mentions unknown states")

    @cached_property
    def out(self) -> dict[int, tuple[tuple[EdgeGuard, int], ...]]:
        table: dict[int, list[tuple[EdgeGuard, int]]] = {q: [] for q in self.states}
        for src, guard, dst in self.transitions:
            table[src].append((guard, dst))
        return {q: tuple(v) for q, v in table.items()}

    @cached_property
    def props(self) -> frozenset[str]:
        out: set[str] = set()
        for _, g, _ in self.transitions:
            out |= g.positive | g.negative
        return frozenset(out)

    def step(self, q: int, letter: frozenset[str]) -> list[int]:
        return [dst for guard, dst in self.out[q] if guard.matches(letter)]


def _check_automaton(states, initial, transitions) -> None:
    known = frozenset(states)
    if len(known) != len(states):
        raise ValueError("duplicate automaton state")
    if not initial <= known:
        raise ValueError("initial states must be automaton states")
    for src, _, dst in transitions:
        if src not in known or dst not in known:
            raise ValueError(f"transition {src}->{dst} leaves the state set")


# -- tableau -----------------------------------------------------------------

_INIT = -1


@dataclass
class _Node:
    incoming: set[int]
    new: set[Formula]
    old: frozenset[Formula] = frozenset()
    nxt: frozenset[Formula] = frozenset()
    ident: int = field(default=0)


def _is_literal(f: Formula) -> bool:
    return isinstance(f, (Top, Bottom, Atom)) or (isinstance(f, Not) and isinstance(f.operand, Atom))


def _conflicts(lit: Formula, old: frozenset[Formula]) -> bool:
    if isinstance(lit, Bottom):
        return True
    if isinstance(lit, Atom):
        return Not(lit) in old
    if isinstance(lit, Not):
        return lit.operand in old
    return False


def _tableau(f: Formula) -> list[_Node]:
    order = {g: ltl.to_string(g) for g in ltl.subformulas(f)}
    done: list[_Node] = []
    index: dict[tuple[frozenset, frozenset], _Node] = {}
    pending = [_Node(incoming={_INIT}, new={f})]
    while pending:
        node = pending.pop()
        if not node.new:
            key = (node.old, node.nxt)
            twin = index.get(key)
            if twin is not None:
                twin.incoming |= node.incoming
                continue
            node.ident = len(done)
            done.append(node)
            index[key] = node
            pending.append(_Node(incoming={node.ident}, new=set(node.nxt)))
            continue
        eta = min(node.new, key=order.__getitem__)
        node.new.discard(eta)
        old = node.old | {eta}
        if _is_literal(eta):
            if not _conflicts(eta, node.old):
                pending.append(_Node(node.incoming, node.new, old, node.nxt))
        elif isinstance(eta, ltl.And):
            new = node.new | ({eta.left, eta.right} - old)
            pending.append(_Node(node.incoming, new, old, node.nxt))
        elif isinstance(eta, ltl.Next):
            pending.append(_Node(node.incoming, node.new, old, node.nxt | {eta.operand}))
        else:
            if isinstance(eta, ltl.Until):
                first, first_next, second = {eta.left}, {eta}, {eta.right}
            elif isinstance(eta, ltl.Release):
                first, first_next, second = {eta.right}, {eta}, {eta.left, eta.right}
            elif isinstance(eta, ltl.Or):
                first, first_next, second = {eta.left}, set(), {eta.right}
            else:
                raise TypeError(f"formula not in NNF: {eta}")
            # pushed in reverse so the first branch is expanded first
            pending.append(_Node(set(node.incoming), node.new | (second - old), old, node.nxt))
            pending.append(
                _Node(set(node.incoming), node.new | (first - old), old, node.nxt | first_next)
            )
    return done


def _guard(old: frozenset[Formula]) -> EdgeGuard:
    pos = frozenset(g.name for g in old if isinstance(g, Atom))
    neg = frozenset(g.operand.name for g in old if isinstance(g, Not) and isinstance(g.operand, Atom))
    return EdgeGuard(pos, neg)


def to_gba(f: Formula) -> GBA:
    """Tableau GBA for ``f``; state 0 is a fresh initial state."""
    f = ltl.to_nnf(f)
    nodes = _tableau(f)
    trans = []
    for node in nodes:
        g = _guard(node.old)
        for src in sorted(node.incoming):
            trans.append((0 if src == _INIT else src + 1, g, node.ident + 1))
    untils = sorted(
        (g for g in ltl.subformulas(f) if isinstance(g, ltl.Until)), key=ltl.to_string
    )
    acceptance = tuple(
        frozenset(n.ident + 1 for n in nodes if u not in n.old or u.right in n.old) for u in untils
    )
    return GBA(
        states=tuple(range(len(nodes) + 1)),
        initial=frozenset({0}),
        transitions=tuple(trans),
        acceptance=acceptance,
    )


def degeneralize(g: GBA) -> NBA:
    """Counter construction over ``g.states x {0..k}``; level ``k`` accepts.

    Level ``i < k`` waits for acceptance set ``i``; entering a member moves
    past every consecutive set it belongs to.  Leaving level ``k`` restarts
    the count at 0.  With no acceptance sets every state sits at level
    0 = k and accepts.
    """
    k = len(g.acceptance)
    out: dict[int, list[tuple[EdgeGuard, int]]] = {q: [] for q in g.states}
    for src, guard, dst in g.transitions:
        out[src].append((guard, dst))

    def level_after(level: int, dst: int) -> int:
        base = 0 if level == k else level
        while base < k and dst in g.acceptance[base]:
            base += 1
        return base

    ids: dict[tuple[int, int], int] = {}
    order: list[tuple[int, int]] = []

    def ident(pair: tuple[int, int]) -> int:
        if pair not in ids:
            ids[pair] = len(order)
            order.append(pair)
        return ids[pair]

    initial = [ident((q, 0)) for q in sorted(g.initial)]
    trans = []
    i = 0
    while i < len(order):
        q, level = order[i]
        for guard, dst in out[q]:
            trans.append((i, guard, ident((dst, level_after(level, dst)))))
        i += 1
    accepting = frozenset(ids[p] for p in order if p[1] == k)
    return NBA(tuple(range(len(order))), frozenset(initial), tuple(trans), accepting)


def prune(a: NBA) -> NBA:
    """Drop states that cannot reach an accepting cycle; initial states stay."""
    adj = [[(d, 0) for _, d in a.out[q]] for q in a.states]
    good = {q for q in nodes_on_cycles(adj) if q in a.accepting}
    radj: list[list[tuple[int, int]]] = [[] for _ in a.states]
    for s, _, d in a.transitions:
        radj[d].append((s, 0))
    good_comp = set()
    for comp in strongly_connected_components(adj):
        if any(q in good for q in comp):
            good_comp.update(comp)
    live = reachable(radj, good_comp)
    keep_order = [q for q in a.states if q in live or q in a.initial]
    # renumber breadth-first from the initial states for stable ids
    fwd = {q: [d for _, d in a.out[q] if d in live] for q in keep_order}
    order: list[int] = []
    seen: set[int] = set()
    for q in sorted(a.initial):
        if q not in seen:
            seen.add(q)
            order.append(q)
    i = 0
    while i < len(order):
        for d in fwd[order[i]]:
            if d not in seen:
                seen.add(d)
                order.append(d)
        i += 1
    new_id = {q: n for n, q in enumerate(order)}
    trans = tuple(
        (new_id[s], g, new_id[d])
        for s, g, d in a.transitions
        if s in new_id and d in new_id and s in live and d in live
    )
    return NBA(
        tuple(range(len(order))),
        frozenset(new_id[q] for q in a.initial),
        trans,
        frozenset(new_id[q] for q in order if q in a.accepting and q in live),
    )


@lru_cache(maxsize=256)
def translate(f: Formula) -> NBA:
    """NBA accepting exactly the words satisfying ``f``."""
    a = prune(degeneralize(to_gba(f)))
    nnf = ltl.to_nnf(f)
    closure = sum(1 for _ in ltl.subformulas(nnf))
    untils = sum(1 for g in ltl.subformulas(nnf) if isinstance(g, ltl.Until))
    # resource guard: one tableau node per subset of the closure, plus the
    # fresh initial state, times the degeneralization levels
    bound = (2**closure + 1) * (untils + 1)
    if len(a.states) > bound:
        raise AssertionError(f"automaton has {len(a.states)} states, bound is {bound}")
    return a


# -- acceptance of lasso words -----------------------------------------------


def _lasso_product(a, w: LassoWord, step) -> tuple[list[list[tuple[int, int]]], list[tuple[int, int]], list[int]]:
    ids: dict[tuple[int, int], int] = {}
    nodes: list[tuple[int, int]] = []
    adj: list[list[tuple[int, int]]] = []
    for q in sorted(a.initial):
        ids[(q, 0)] = len(nodes)
        nodes.append((q, 0))
        adj.append([])
    roots = list(range(len(nodes)))
    i = 0
    while i < len(nodes):
        q, pos = nodes[i]
        nxt = w.successor(pos)
        for d in step(q, w.letter(pos)):
            key = (d, nxt)
            j = ids.get(key)
            if j is None:
                j = ids[key] = len(nodes)
                nodes.append(key)
                adj.append([])
            adj[i].append((j, 0))
        i += 1
    return adj, nodes, roots


def accepts_lasso(a: NBA | GBA, w: LassoWord) -> bool:
    """Is there a run on ``w`` visiting accepting states infinitely often?

    Searches the product of ``a`` with the positions of ``w`` for a reachable
    strongly connected component that contains an accepting state (for a
    GBA, one member of every acceptance set) and at least one edge.
    """
    if isinstance(a, GBA):
        out: dict[int, list[tuple[EdgeGuard, int]]] = {q: [] for q in a.states}
        for s, g, d in a.transitions:
            out[s].append((g, d))
        step = lambda q, letter: [d for g, d in out[q] if g.matches(letter)]  # noqa: E731
        sets = a.acceptance
    else:
        step = a.step
        sets = (a.accepting,)
    adj, nodes, roots = _lasso_product(a, w, step)
    for comp in strongly_connected_components(adj, roots):
        if len(comp) == 1 and not any(v == comp[0] for v, _ in adj[comp[0]]):
            continue
        members = {nodes[i][0] for i in comp}
        if all(members & acc for acc in sets):
            return True
    return False


def to_dot(a: NBA, name: str = "nba") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for q in a.states:
        shape = "doublecircle" if q in a.accepting else "circle"
        lines.append(f'  "q{q}" [shape={shape}];')
    for q in sorted(a.initial):
        lines.append(f'  "init{q}" [shape=point];')
        lines.append(f'  "init{q}" -> "q{q}";')
    for s, g, d in a.transitions:
        lines.append(f'  "q{s}" -> "q{d}" [label="{g}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
