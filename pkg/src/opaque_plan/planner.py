"""Security-aware optimal lasso planning over the twin/automaton product."""

from __future__ import annotations

import heapq
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Hashable, Literal, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as sparse_dijkstra

from .buchi import translate
from .graphs import Digraph, dijkstra, reachable, walk_back
from .ltl import Formula
from .model import WTS, Plan, json_number, plan_costs
from .synthesis import (
    Product,
    ProductState,
    build_product,
    build_twin,
    goal_ids,
    initial_ids,
    project,
    project_witness,
)

HALF = Fraction(1, 2)
THREADS_ENV = "OPAQUE_PLAN_THREADS"
BATCH = 32  # goals per compiled Dijkstra call; bounds the dense result rows
EXACT = 2**53  # float64 holds every integer below this


@dataclass(frozen=True)
class PlanResult:
    initial: str
    plan: Plan
    witness: Plan
    product_prefix: tuple[ProductState, ...]
    product_cycle: tuple[ProductState, ...]
    prefix_cost: Fraction
    cycle_cost: Fraction
    cost: Fraction
    alpha: Fraction
    secure: bool = True

    feasible = True


@dataclass(frozen=True)
class Infeasible:
    initial: str
    reason: Literal["no-initial-pair", "no-reachable-goal"]

    feasible = False

    @property
    def message(self) -> str:
        return f"no feasible plan from {self.initial}"


def _graph(g: Any) -> Digraph:
    return g if isinstance(g, Digraph) else g.graph


def shortest_path(g: Any, src: Hashable, dst: Hashable) -> tuple[list[Hashable], Fraction] | None:
    """Dijkstra; ``src == dst`` gives the one-state path of cost 0."""
    dg = _graph(g)
    s, d = dg.index[src], dg.index[dst]
    dist, parent = dijkstra(dg.adj, s)
    if d not in dist:
        return None
    return dg.names(walk_back(parent, s, d)), dg.real(dist[d])


def _cycle_ids(adj: Sequence[Sequence[tuple[int, int]]], q: int) -> tuple[list[int], int] | None:
    """Cheapest cycle of one or more edges through ``q``, as ``q, ..., last``."""
    dist: dict[int, int] = {}
    parent: dict[int, int] = {}
    heap: list[tuple[int, int]] = []
    for v, w in adj[q]:
        if v not in dist or w < dist[v]:
            dist[v] = w
            parent[v] = q
            heapq.heappush(heap, (w, v))
    done: set[int] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done or d > dist[u]:
            continue
        if u == q:
            path = [parent[q]]
            while path[-1] != q:
                path.append(parent[path[-1]])
            path.reverse()
            return path, d
        done.add(u)
        for v, w in adj[u]:
            nd = d + w
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
    return None


def shortest_cycle(g: Any, q: Hashable) -> tuple[list[Hashable], Fraction] | None:
    """Minimum-weight cycle through ``q``; the closing edge back to ``q`` is implicit."""
    dg = _graph(g)
    found = _cycle_ids(dg.adj, dg.index[q])
    if found is None:
        return None
    ids, cost = found
    return dg.names(ids), dg.real(cost)


def goal_cycles(
    adj: Sequence[Sequence[tuple[int, int]]], goals: Sequence[int], workers: int = 1
) -> dict[int, tuple[list[int], int] | None]:
    """Cheapest cycle through every goal, as :func:`_cycle_ids` would find.

    Runs compiled Dijkstra from batches of goals; the cycle through ``g``
    closes on whichever predecessor of ``g`` is nearest.  Falls back to the
    pure-Python search when path costs could lose precision as floats.
    """
    n = len(adj)
    heaviest = max((w for edges in adj for _, w in edges), default=0)
    if heaviest * n >= EXACT:
        return {q: _cycle_ids(adj, q) for q in goals}
    best: dict[tuple[int, int], int] = {}
    rev: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for i, edges in enumerate(adj):
        for j, w in edges:
            if (i, j) not in best or w < best[i, j]:
                best[i, j] = w
    for (i, j), w in best.items():
        rev[j].append((i, w))
    rows = np.fromiter((i for i, _ in best), dtype=np.int64, count=len(best))
    cols = np.fromiter((j for _, j in best), dtype=np.int64, count=len(best))
    vals = np.fromiter(best.values(), dtype=np.float64, count=len(best))
    m = csr_matrix((vals, (rows, cols)), shape=(n, n))

    def solve(batch: Sequence[int]) -> list[tuple[list[int], int] | None]:
        dist, pred = sparse_dijkstra(m, directed=True, indices=list(batch), return_predecessors=True)
        out = []
        for r, g in enumerate(batch):
            closing = [
                (int(dist[r, i]) + w, i) for i, w in sorted(rev[g]) if np.isfinite(dist[r, i])
            ]
            if not closing:
                out.append(None)
                continue
            cost, last = min(closing)
            path = [last]
            while path[-1] != g:
                path.append(int(pred[r, path[-1]]))
            path.reverse()
            out.append((path, cost))
        return out

    batches = [goals[i : i + BATCH] for i in range(0, len(goals), BATCH)]
    if workers > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(solve, batches))
    else:
        results = [solve(b) for b in batches]
    return {g: c for batch, res in zip(batches, results) for g, c in zip(batch, res)}


def _check_alpha(alpha: Fraction) -> Fraction:
    alpha = Fraction(alpha)
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha


def plan_cost(prefix_cost: Fraction, cycle_cost: Fraction, alpha: Fraction = HALF) -> Fraction:
    alpha = _check_alpha(alpha)
    if prefix_cost < 0 or cycle_cost < 0:
        raise ValueError("costs must be nonnegative")
    return alpha * Fraction(prefix_cost) + (1 - alpha) * Fraction(cycle_cost)


def tie_key(cost: Fraction, plan: Plan) -> tuple:
    """Total order used to pick among equally cheap plans."""
    return (cost, len(plan.prefix), len(plan.cycle), plan.prefix + plan.cycle)


def _mismatch(plan: Plan, witness: Plan) -> tuple[int, int]:
    """Positions (cycle, then prefix part) where the witness leaves the plan,
    over one common period of the two lassos."""
    k = max(len(plan.prefix), len(witness.prefix))
    m = len(plan.cycle) * len(witness.cycle)
    a = _unroll(plan, k + m)
    b = _unroll(witness, k + m)
    pre = sum(x != y for x, y in zip(a[:k], b[:k]))
    cyc = sum(x != y for x, y in zip(a[k:], b[k:]))
    return cyc, pre


def _unroll(p: Plan, n: int) -> list[str]:
    out = list(p.prefix[:n])
    while len(out) < n:
        out.extend(p.cycle[: n - len(out)])
    return out


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def plan(
    t: WTS,
    f: Formula,
    q0: str,
    alpha: Fraction = HALF,
    *,
    secure: bool = True,
    workers: int | None = None,
) -> PlanResult | Infeasible:
    """Cheapest secure lasso from ``q0`` whose trace satisfies ``f``.

    With ``secure=False`` the twin is cut down to its diagonal, which yields
    the ordinary optimal plan with no regard for what the observer learns.
    """
    alpha = _check_alpha(alpha)
    if q0 not in t.initial:
        raise ValueError(f"{q0!r} is not an initial state")
    b = translate(f)
    v = build_twin(t, diagonal=not secure)
    p = build_product(v, b)
    return _search(t, p, q0, alpha, secure, workers or default_workers())


def _search(
    t: WTS, p: Product, q0: str, alpha: Fraction, secure: bool, workers: int
) -> PlanResult | Infeasible:
    g = p.graph
    if secure:
        starts = initial_ids(p, q0, t)
    else:
        starts = [i for i in p.initial if g.nodes[i][0][0] == q0]
    if not starts:
        return Infeasible(q0, "no-initial-pair")
    goals = goal_ids(p)
    live = reachable(g.adj, starts) & goals
    if not live:
        return Infeasible(q0, "no-reachable-goal")

    # Lexicographic weights: real cost first, then the number of steps where
    # the copy leaves the robot's own state.  A simple path has fewer than
    # len(g) + 1 edges, so the second term never spills into the first.
    big = len(g) + 1
    adj = [
        [(j, w * big + (g.nodes[j][0][0] != g.nodes[j][0][1])) for j, w in edges]
        for edges in g.adj
    ]
    ordered = sorted(live)
    cycles = goal_cycles(adj, ordered, workers)

    best = None
    for qi in sorted(starts):
        dist, parent = dijkstra(adj, qi)
        for qg in ordered:
            if qg not in dist or cycles[qg] is None:
                continue
            cyc_ids, _ = cycles[qg]
            pre_ids = walk_back(parent, qi, qg)[:-1]
            pre_states = g.names(pre_ids)
            cyc_states = g.names(cyc_ids)
            lasso = Plan(tuple(project(pre_states)), tuple(project(cyc_states))).canonical()
            witness = Plan(
                tuple(project_witness(pre_states)), tuple(project_witness(cyc_states))
            ).canonical()
            j_pre, j_suf = plan_costs(t, lasso)
            cost = plan_cost(j_pre, j_suf, alpha)
            key = tie_key(cost, lasso) + (_mismatch(lasso, witness),)
            if best is None or key < best[0]:
                best = (key, lasso, witness, pre_states, cyc_states, j_pre, j_suf, cost)
    assert best is not None  # every live goal lies on a cycle
    _, lasso, witness, pre_states, cyc_states, j_pre, j_suf, cost = best
    return PlanResult(
        initial=q0,
        plan=lasso,
        witness=witness,
        product_prefix=tuple(pre_states),
        product_cycle=tuple(cyc_states),
        prefix_cost=j_pre,
        cycle_cost=j_suf,
        cost=cost,
        alpha=alpha,
        secure=secure,
    )


def to_document(result: PlanResult | Infeasible) -> dict[str, Any]:
    if isinstance(result, Infeasible):
        return {"initial": result.initial, "feasible": False, "reason": result.reason}
    return {
        "initial": result.initial,
        "secure": result.secure,
        "prefix": list(result.plan.prefix),
        "cycle": list(result.plan.cycle),
        "witness_prefix": list(result.witness.prefix),
        "witness_cycle": list(result.witness.cycle),
        "alpha": json_number(result.alpha),
        "cost": {
            "prefix": json_number(result.prefix_cost),
            "cycle": json_number(result.cycle_cost),
            "weighted": json_number(result.cost),
        },
    }
