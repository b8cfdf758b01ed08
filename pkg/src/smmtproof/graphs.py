"""Symbolic-graph reachability: evaluation, path/cut witnesses, and the
Horn definition of the positive reachability atom.

Edges carry CNF variables; a predicate reach(src, dst) holds on a total edge
assignment iff dst is reachable from src over the enabled edges. No negative
definition is ever built for reachability: negative lemmas go through the
instantiation-based upper bound with a vertex-status witness.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .cnf import Clause
from .monohorn import MonotonicDefinition


@dataclass
class SymbolicGraph:
    """Directed graph whose edges are guarded by CNF variables."""

    nodes: int
    edges: list[tuple[int, int, int]] = field(default_factory=list)  # (from, to, edge_var)
    capacities: dict[int, object] = field(default_factory=dict)  # edge index -> BitVector

    def add_edge(self, u: int, v: int, edge_var: int, capacity=None) -> int:
        if not (0 <= u < self.nodes and 0 <= v < self.nodes):
            raise ValueError(f"edge ({u},{v}) out of range")
        if any(ev == edge_var for _, _, ev in self.edges):
            raise ValueError(f"edge variable {edge_var} reused")
        self.edges.append((u, v, edge_var))
        if capacity is not None:
            self.capacities[len(self.edges) - 1] = capacity
        return len(self.edges) - 1

    def edge_vars(self) -> tuple[int, ...]:
        return tuple(ev for _, _, ev in self.edges)


@dataclass
class ReachPredicate:
    graph: SymbolicGraph
    source: int
    target: int
    predicate_var: int

    def __post_init__(self):
        n = self.graph.nodes
        if not (0 <= self.source < n and 0 <= self.target < n):
            raise ValueError("source/target out of range")


def _enabled_adjacency(g: SymbolicGraph, assignment: Mapping[int, bool]):
    adj: dict[int, list[tuple[int, int]]] = {}
    for idx, (u, v, ev) in enumerate(g.edges):
        if assignment[ev] and u != v:  # self-loops never affect reachability
            adj.setdefault(u, []).append((v, idx))
    return adj


def reachable_set(g: SymbolicGraph, src: int, assignment: Mapping[int, bool]) -> set[int]:
    """All vertices reachable from src over enabled edges (BFS, index order)."""
    adj = _enabled_adjacency(g, assignment)
    seen = {src}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v, _ in sorted(adj.get(u, ())):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def eval_reach(g: SymbolicGraph, src: int, dst: int, assignment: Mapping[int, bool]) -> bool:
    """Reachability of dst from src using only enabled edges."""
    return dst in reachable_set(g, src, assignment)


def path_witness(
    g: SymbolicGraph, src: int, dst: int, assignment: Mapping[int, bool]
) -> list[int]:
    """Edge variables of a shortest enabled src->dst path.

    BFS with ties broken by lowest node index, then lowest edge index; the
    empty list when src == dst. Raises when dst is unreachable.
    """
    if src == dst:
        return []
    adj = _enabled_adjacency(g, assignment)
    parent: dict[int, tuple[int, int]] = {}
    seen = {src}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v, idx in sorted(adj.get(u, ())):
            if v not in seen:
                seen.add(v)
                parent[v] = (u, idx)
                queue.append(v)
            if v == dst:
                queue.clear()
                break
    if dst not in parent:
        raise ValueError("target not reachable: no path witness")
    path = []
    node = dst
    while node != src:
        u, idx = parent[node]
        path.append(g.edges[idx][2])
        node = u
    path.reverse()
    return path


def cut_witness(
    g: SymbolicGraph, src: int, dst: int, assignment: Mapping[int, bool]
) -> dict[int, bool]:
    """Per-vertex reachability statuses certifying unreachability of dst."""
    seen = reachable_set(g, src, assignment)
    if dst in seen:
        raise ValueError("target is reachable: no cut witness")
    return {v: v in seen for v in range(g.nodes)}


def crossing_disabled_edges(
    g: SymbolicGraph, statuses: Mapping[int, bool]
) -> list[int]:
    """Edge variables crossing the (reachable, unreachable) partition."""
    return [
        ev
        for (u, v, ev) in g.edges
        if statuses[u] and not statuses[v]
    ]


@dataclass
class ReachDefinition:
    """Positive reachability definition plus its vertex-atom mapping."""

    definition: MonotonicDefinition
    vertex_atom: dict[int, int]

    def status_literals(self, statuses: Mapping[int, bool]) -> tuple[int, ...]:
        return tuple(
            self.vertex_atom[v] if reached else -self.vertex_atom[v]
            for v, reached in sorted(statuses.items())
        )


def positive_definition(pred: ReachPredicate, fresh_var_base: int) -> ReachDefinition:
    """Horn definition of the positive reachability atom.

    One fresh atom per vertex; an edge clause per symbolic edge, the head
    link, and the unit asserting the source reaches itself: |E| + 2 clauses.
    """
    g = pred.graph
    atom = {v: fresh_var_base + 1 + v for v in range(g.nodes)}
    clauses: list[Clause] = []
    for u, v, ev in g.edges:
        clauses.append((-atom[u], -ev, atom[v]))
    clauses.append((-atom[pred.target], pred.predicate_var))
    clauses.append((atom[pred.source],))
    defn = MonotonicDefinition(
        clauses=clauses,
        head_var=pred.predicate_var,
        head_sign=1,
        inputs={ev: 1 for ev in g.edge_vars()},
        name=f"reach({pred.source}->{pred.target})",
    ).check()
    return ReachDefinition(defn, atom)


class ReachBackend:
    """Theory backend for one reachability predicate."""

    def __init__(self, pred: ReachPredicate, defn: ReachDefinition | None = None):
        self.pred = pred
        self.defn = defn
        self.inputs = pred.graph.edge_vars()
        self.polarity = {ev: 1 for ev in self.inputs}

    def evaluate(self, model: Mapping[int, bool]) -> bool:
        return eval_reach(self.pred.graph, self.pred.source, self.pred.target, model)

    def strengthen(self, sign, assigned, completion):
        g = self.pred.graph
        if sign > 0:
            edges = path_witness(g, self.pred.source, self.pred.target, completion)
            return tuple(edges), ()
        statuses = cut_witness(g, self.pred.source, self.pred.target, completion)
        m_a = tuple(-ev for ev in crossing_disabled_edges(g, statuses))
        witness = self.defn.status_literals(statuses) if self.defn else ()
        return m_a, witness
