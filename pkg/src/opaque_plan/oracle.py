"""Independent checks for plans: security, satisfaction, brute-force optimum.

Nothing here touches the twin-WTS or the product; the planner is validated
against these routines.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .buchi import NBA, translate
from .graphs import dijkstra, nodes_on_cycles, walk_back
from .ltl import Formula, eval_lasso
from .model import WTS, ModelError, Plan, check_plan, trace
from .planner import HALF, _check_alpha, _cycle_ids, tie_key


class OracleLimit(RuntimeError):
    """The enumeration grew past its configured ceiling."""


@dataclass(frozen=True)
class SecurityVerdict:
    secure: bool
    witness: Plan | None = None

    def __post_init__(self) -> None:
        if self.secure != (self.witness is not None):
            raise ValueError("a verdict is secure exactly when it carries a witness")


def is_secure(t: WTS, plan: Plan) -> SecurityVerdict:
    """Decide whether some non-secret start produces the plan's observations.

    Walks the observer-synchronized graph whose nodes pair a candidate
    witness state with a position of the plan lasso; an infinite witness
    exists iff a cycle of that graph is reachable from a non-secret start.
    Among witnesses the one staying closest to the plan itself is returned.
    """
    check_plan(t, plan)
    if plan.start not in t.initial:
        raise ModelError(f"plan starts at {plan.start!r}, which is not initial")
    if plan.start not in t.secret:
        return SecurityVerdict(True, plan.canonical())

    H = t.outputs
    seq = plan.prefix + plan.cycle
    n, k = len(seq), len(plan.prefix)

    def nxt(i: int) -> int:
        return i + 1 if i + 1 < n else k

    ids: dict[tuple[str, int], int] = {}
    nodes: list[tuple[str, int]] = []
    adj: list[list[tuple[int, int]]] = []

    def node(key: tuple[str, int]) -> int:
        j = ids.get(key)
        if j is None:
            j = ids[key] = len(nodes)
            nodes.append(key)
            adj.append([])
        return j

    # a virtual root feeds the non-secret starts so one Dijkstra covers them
    root = node(("", -1))
    for w in t.states:
        if w in t.initial and w not in t.secret and H[w] == H[seq[0]]:
            adj[root].append((node((w, 0)), int(w != seq[0])))
    i = 1
    while i < len(nodes):
        w, pos = nodes[i]
        p2 = nxt(pos)
        for w2 in t.succ[w]:
            if H[w2] == H[seq[p2]]:
                adj[i].append((node((w2, p2)), int(w2 != seq[p2])))
        i += 1

    looping = nodes_on_cycles(adj)
    if not looping:
        return SecurityVerdict(False)
    dist, parent = dijkstra(adj, root)
    best = None
    for z in sorted(looping):
        if z not in dist:
            continue
        cyc = _cycle_ids(adj, z)
        assert cyc is not None
        key = (cyc[1], dist[z], z)
        if best is None or key < best[0]:
            best = (key, z, cyc[0])
    if best is None:
        return SecurityVerdict(False)
    _, z, cyc_ids = best
    pre_ids = walk_back(parent, root, z)[1:-1]
    witness = Plan(
        tuple(nodes[j][0] for j in pre_ids), tuple(nodes[j][0] for j in cyc_ids)
    ).canonical()
    return SecurityVerdict(True, witness)


def satisfies(t: WTS, plan: Plan, f: Formula) -> bool:
    check_plan(t, plan)
    return eval_lasso(f, trace(t, plan))


def verify(t: WTS, plan: Plan, f: Formula) -> dict:
    """Both checks at once, in the shape the CLI prints."""
    verdict = is_secure(t, plan)
    out = {
        "initial": plan.start,
        "secure": verdict.secure,
        "satisfies": satisfies(t, plan, f),
    }
    if verdict.witness is not None:
        out["witness_prefix"] = list(verdict.witness.prefix)
        out["witness_cycle"] = list(verdict.witness.cycle)
    return out


# -- brute force -------------------------------------------------------------


@dataclass(frozen=True)
class BruteForceResult:
    plan: Plan
    prefix_cost: Fraction
    cycle_cost: Fraction
    cost: Fraction
    alpha: Fraction
    candidates: int


def brute_force_plan(
    t: WTS,
    f: Formula,
    q0: str,
    max_prefix: int,
    max_cycle: int,
    alpha: Fraction = HALF,
    *,
    prune: bool = True,
    ceiling: int = 2_000_000,
) -> BruteForceResult | None:
    """Cheapest secure satisfying lasso from ``q0`` within the length bounds.

    Every lasso with ``len(prefix) <= max_prefix`` and
    ``1 <= len(cycle) <= max_cycle`` is a candidate; candidates are tried in
    the planner's tie-break order and the first passing :func:`satisfies`
    and :func:`is_secure` wins.

    With ``prune`` the enumeration keeps one representative per class of
    interchangeable prefixes (same entry state, same set of observer-
    consistent non-secret states, same set of automaton states) and of
    interchangeable cycles (same entry state and same effect on both), each
    the cheapest and shortest of its class.  Swapping a lasso's prefix or
    cycle for its representative keeps it feasible and does not raise its
    cost or lengths, so the optimum is unchanged while the search becomes
    finite at any bound.
    """
    alpha = _check_alpha(alpha)
    if max_prefix < 0 or max_cycle < 1:
        raise ValueError("bounds must allow at least a one-state cycle")
    if q0 not in t.initial:
        raise ValueError(f"{q0!r} is not an initial state")
    if prune:
        prefixes, cycles = _classes(t, translate(f), q0, max_prefix, max_cycle, ceiling)
    else:
        prefixes = _all_prefixes(t, q0, max_prefix)
        cycles = {}
        for s in {e[-1] for _, e in prefixes}:
            cycles[s] = list(_all_cycles(t, s, max_cycle))
    scale = t.scale
    cands = []
    for pcost, entry in prefixes:
        for ccost, cyc in cycles.get(entry[-1], ()):
            p = Plan(entry[:-1], cyc)
            cost = alpha * Fraction(pcost, scale) + (1 - alpha) * Fraction(ccost, scale)
            cands.append((tie_key(cost, p), p, pcost, ccost))
            if len(cands) > ceiling:
                raise OracleLimit(f"more than {ceiling} candidate lassos")
    cands.sort(key=lambda c: c[0])
    verdicts: dict[Plan, bool] = {}
    for key, p, pcost, ccost in cands:
        ok = verdicts.get(p)
        if ok is None:
            ok = verdicts[p] = satisfies(t, p, f) and is_secure(t, p).secure
        if ok:
            return BruteForceResult(
                p, Fraction(pcost, scale), Fraction(ccost, scale), key[0], alpha, len(cands)
            )
    return None


def _all_prefixes(t: WTS, q0: str, bound: int) -> list[tuple[int, tuple[str, ...]]]:
    """Every walk from ``q0`` with at most ``bound`` edges, as (cost, states)."""
    out = []
    frontier = [(0, (q0,))]
    for _ in range(bound + 1):
        out.extend(frontier)
        nxt = []
        for c, walk in frontier:
            u = walk[-1]
            for v in t.succ[u]:
                nxt.append((c + int(t.weights[u, v] * t.scale), walk + (v,)))
        frontier = nxt
    return out


def _all_cycles(t: WTS, s: str, bound: int) -> Iterator[tuple[int, tuple[str, ...]]]:
    scale = t.scale
    frontier = [(0, (s,))]
    for _ in range(bound):
        nxt = []
        for c, walk in frontier:
            u = walk[-1]
            if t.has_edge(u, s):
                yield c + int(t.weights[u, s] * scale), walk
            for v in t.succ[u]:
                nxt.append((c + int(t.weights[u, v] * scale), walk + (v,)))
        frontier = nxt


def _classes(
    t: WTS, b: NBA, q0: str, max_prefix: int, max_cycle: int, ceiling: int
) -> tuple[list[tuple[int, tuple[str, ...]]], dict[str, list[tuple[int, tuple[str, ...]]]]]:
    H, L, scale = t.outputs, t.labels, t.scale
    explored = 0

    def charge() -> None:
        nonlocal explored
        explored += 1
        if explored > ceiling:
            raise OracleLimit(f"more than {ceiling} enumeration states")

    def post_w(ws: frozenset[str], target: str) -> frozenset[str]:
        return frozenset(v for u in ws for v in t.succ[u] if H[v] == H[target])

    def post_n(ns: frozenset[int], letter: frozenset[str]) -> frozenset[int]:
        return frozenset(r for q in ns for r in b.step(q, letter))

    # prefixes: walks from q0 ending on the cycle's entry state
    w0 = frozenset(w for w in t.states if w in t.initial and w not in t.secret and H[w] == H[q0])
    prefixes: list[tuple[int, tuple[str, ...]]] = []
    if not w0:
        return prefixes, {}
    best: dict[tuple, int] = {}
    layer = {(q0, w0, frozenset(b.initial)): (0, (q0,))}
    for depth in range(max_prefix + 1):
        nxt: dict[tuple, tuple[int, tuple[str, ...]]] = {}
        for key in sorted(layer, key=lambda k: layer[k]):
            cost, walk = layer[key]
            if key in best and best[key] <= cost:
                continue
            best[key] = cost
            prefixes.append((cost, walk))
            charge()
            if depth == max_prefix:
                continue
            u, ws, ns = key
            ns2 = post_n(ns, L[u])
            if not ns2:
                continue
            for v in t.succ[u]:
                ws2 = post_w(ws, v)
                if not ws2:
                    continue
                cand = (cost + int(t.weights[u, v] * scale), walk + (v,))
                k2 = (v, ws2, ns2)
                if k2 not in nxt or cand < nxt[k2]:
                    nxt[k2] = cand
        layer = nxt

    # cycles: for each entry state, walks back to it, classed by their effect
    cycles: dict[str, list[tuple[int, tuple[str, ...]]]] = {}
    acc = b.accepting
    for s in sorted({w[-1] for _, w in prefixes}, key=t.order.__getitem__):
        rw0 = frozenset((a, a) for a in t.states if H[a] == H[s])
        rn0 = frozenset((p, p, False) for p in b.states)
        seen_mid: dict[tuple, int] = {}
        closed: dict[tuple, tuple[int, tuple[str, ...]]] = {}
        layer = {(s, rw0, rn0): (0, (s,))}
        for _ in range(max_cycle):
            nxt = {}
            for key in sorted(layer, key=lambda k: layer[k]):
                cost, walk = layer[key]
                if key in seen_mid and seen_mid[key] <= cost:
                    continue
                seen_mid[key] = cost
                charge()
                u, rw, rn = key
                rn2 = frozenset(
                    (p, r2, flag or r2 in acc) for p, r, flag in rn for r2 in b.step(r, L[u])
                )
                for v in t.succ[u]:
                    rw2 = frozenset((a, y) for a, x in rw for y in t.succ[x] if H[y] == H[v])
                    c2 = cost + int(t.weights[u, v] * scale)
                    if v == s:
                        ck = (rw2, rn2)
                        if ck not in closed or (c2, len(walk), walk) < closed[ck]:
                            closed[ck] = (c2, len(walk), walk)
                    if rw2 and rn2:
                        k2 = (v, rw2, rn2)
                        cand = (c2, walk + (v,))
                        if k2 not in nxt or cand < nxt[k2]:
                            nxt[k2] = cand
            layer = nxt
        cycles[s] = [(c, w) for c, _, w in sorted(closed.values())]
    return prefixes, cycles


def lasso_candidates(t: WTS, q0: str, max_prefix: int, max_cycle: int) -> Iterator[Plan]:
    """All lassos from ``q0`` within the bounds, unfiltered."""
    for _, entry in _all_prefixes(t, q0, max_prefix):
        for _, cyc in _all_cycles(t, entry[-1], max_cycle):
            yield Plan(entry[:-1], cyc)


__all__ = [
    "BruteForceResult",
    "OracleLimit",
    "SecurityVerdict",
    "brute_force_plan",
    "is_secure",
    "lasso_candidates",
    "satisfies",
    "verify",
]
