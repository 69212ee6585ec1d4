"""Dense-id weighted digraph shared by the WTS, twin and product layers."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Hashable, Iterable, Sequence


@dataclass
class Digraph:
    """Weighted digraph over hashable node names.

    Weights are stored as integers; the true weight of an edge is
    ``weight / scale``.  Keeping a common denominator lets the searches run
    on plain ints while every reported cost stays an exact rational.
    """

    nodes: list[Hashable] = field(default_factory=list)
    index: dict[Hashable, int] = field(default_factory=dict)
    adj: list[list[tuple[int, int]]] = field(default_factory=list)
    scale: int = 1

    def add_node(self, name: Hashable) -> int:
        i = self.index.get(name)
        if i is None:
            i = len(self.nodes)
            self.index[name] = i
            self.nodes.append(name)
            self.adj.append([])
        return i

    def add_edge(self, u: int, v: int, weight: int) -> None:
        self.adj[u].append((v, weight))

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adj)

    def real(self, cost: int) -> Fraction:
        return Fraction(cost, self.scale)

    def ids(self, names: Iterable[Hashable]) -> list[int]:
        return [self.index[n] for n in names]

    def names(self, ids: Iterable[int]) -> list[Hashable]:
        return [self.nodes[i] for i in ids]


def common_scale(weights: Iterable[Fraction]) -> int:
    scale = 1
    for w in weights:
        scale = lcm(scale, w.denominator)
    return scale


def reachable(adj: Sequence[Sequence[tuple[int, int]]], sources: Iterable[int]) -> set[int]:
    seen = set(sources)
    stack = list(seen)
    while stack:
        u = stack.pop()
        for v, _ in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def strongly_connected_components(
    adj: Sequence[Sequence[tuple[int, int]]], roots: Iterable[int] | None = None
) -> list[list[int]]:
    """Iterative Tarjan.  Restricted to nodes reachable from ``roots`` if given."""
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n) if roots is None else roots:
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            u, i = work[-1]
            edges = adj[u]
            if i < len(edges):
                work[-1] = (u, i + 1)
                v = edges[i][0]
                if index[v] == -1:
                    index[v] = low[v] = counter
                    counter += 1
                    stack.append(v)
                    on_stack[v] = True
                    work.append((v, 0))
                elif on_stack[v] and index[v] < low[u]:
                    low[u] = index[v]
                continue
            work.pop()
            if work:
                p = work[-1][0]
                if low[u] < low[p]:
                    low[p] = low[u]
            if low[u] == index[u]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == u:
                        break
                comps.append(comp)
    return comps


def nodes_on_cycles(
    adj: Sequence[Sequence[tuple[int, int]]], roots: Iterable[int] | None = None
) -> set[int]:
    """Nodes in an SCC with two or more members or carrying a self-loop."""
    out: set[int] = set()
    for comp in strongly_connected_components(adj, roots):
        if len(comp) > 1:
            out.update(comp)
        else:
            u = comp[0]
            if any(v == u for v, _ in adj[u]):
                out.add(u)
    return out


def dijkstra(
    adj: Sequence[Sequence[tuple[int, int]]], source: int
) -> tuple[dict[int, int], dict[int, int]]:
    """Single-source distances and parent pointers.

    Ties are broken towards the smaller predecessor id so that the returned
    tree is a function of the graph alone.
    """
    dist = {source: 0}
    parent: dict[int, int] = {}
    heap = [(0, source)]
    done: set[int] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in adj[u]:
            nd = d + w
            old = dist.get(v)
            if old is None or nd < old or (nd == old and v not in done and u < parent.get(v, u + 1)):
                dist[v] = nd
                parent[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, parent


def walk_back(parent: dict[int, int], source: int, target: int) -> list[int]:
    path = [target]
    while path[-1] != source:
        path.append(parent[path[-1]])
    path.reverse()
    return path
