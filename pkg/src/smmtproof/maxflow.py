"""s-t max-flow theory: evaluation by augmenting paths, flow and cut
witnesses, and monotonic definitions for both polarities.

The positive definition certifies max-flow >= threshold through min-cut
duality: edge and capacity inputs are renamed upward, a threshold-vs-capacity
chain is built for every s-t cut, and the head fires when no cut is
deficient. The negative definition carries per-edge flow bit-vectors with
value-forced violation detectors (capacity, conservation, and a sink check
against the renamed threshold), each implying the negated atom. Both sides
are genuine propositional definitions, so witness-based lemma discharge stays
sound even for corrupted witnesses.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

from .cnf import Clause, Lit
from .bitvec import (
    Bit,
    BitVector,
    BuiltDefinition,
    Gate,
    VarAlloc,
    bit_value,
    bits_value,
    extremal_completion,
    gt_chain,
    le_chain,
    materialize_product,
    sum_vectors,
)
from .graphs import SymbolicGraph
from .monohorn import MonotonicDefinition

CUT_ENUMERATION_LIMIT = 12  # nodes; the positive definition enumerates cuts


@dataclass
class MaxFlowPredicate:
    """max-flow(source -> target) >= threshold over enabled edges."""

    graph: SymbolicGraph
    source: int
    target: int
    threshold: BitVector
    predicate_var: int

    def __post_init__(self):
        if self.source == self.target:
            raise ValueError("source and target must differ")
        for idx in range(len(self.graph.edges)):
            if idx not in self.graph.capacities:
                raise ValueError(f"edge {idx} has no capacity")

    def input_polarity(self) -> dict[int, int]:
        pol: dict[int, int] = {}
        for _, _, ev in self.graph.edges:
            pol[ev] = 1
        for cap in self.graph.capacities.values():
            for v in cap.var_bits():
                pol[v] = 1
        for v in self.threshold.var_bits():
            pol[v] = -1
        return pol


def _edge_capacities(pred: MaxFlowPredicate, model: Mapping[int, bool]) -> list[int]:
    caps = []
    for idx, (u, v, ev) in enumerate(pred.graph.edges):
        if model[ev]:
            caps.append(bits_value(pred.graph.capacities[idx].bits, model))
        else:
            caps.append(0)
    return caps


def _augment(pred: MaxFlowPredicate, caps: list[int], limit: int | None):
    """Edmonds-Karp with deterministic edge ordering.

    Returns (value, per-edge flow). With a limit, augmentation stops once the
    limit is reached (the truncated flow the witnesses use).
    """
    g = pred.graph
    flow = [0] * len(g.edges)
    total = 0
    while limit is None or total < limit:
        parent: dict[int, tuple[int, int, int]] = {}  # node -> (prev, edge, dir)
        seen = {pred.source}
        queue = deque([pred.source])
        while queue and pred.target not in seen:
            u = queue.popleft()
            for idx, (a, b, _) in enumerate(g.edges):
                if a == u and b not in seen and caps[idx] - flow[idx] > 0:
                    seen.add(b)
                    parent[b] = (u, idx, 1)
                    queue.append(b)
                elif b == u and a not in seen and flow[idx] > 0:
                    seen.add(a)
                    parent[a] = (u, idx, -1)
                    queue.append(a)
        if pred.target not in seen:
            break
        bottleneck = None
        node = pred.target
        while node != pred.source:
            prev, idx, direction = parent[node]
            avail = caps[idx] - flow[idx] if direction > 0 else flow[idx]
            bottleneck = avail if bottleneck is None else min(bottleneck, avail)
            node = prev
        if limit is not None:
            bottleneck = min(bottleneck, limit - total)
        node = pred.target
        while node != pred.source:
            prev, idx, direction = parent[node]
            flow[idx] += direction * bottleneck
            node = prev
        total += bottleneck
    return total, flow


def max_flow_value(pred: MaxFlowPredicate, model: Mapping[int, bool]) -> int:
    return _augment(pred, _edge_capacities(pred, model), None)[0]


def eval_maxflow(pred: MaxFlowPredicate, model: Mapping[int, bool]) -> bool:
    return max_flow_value(pred, model) >= bits_value(pred.threshold.bits, model)


def flow_witness(pred: MaxFlowPredicate, model: Mapping[int, bool]) -> list[int]:
    """Per-edge integer flow meeting the threshold exactly.

    The max-flow algorithm's augmentations are truncated at the threshold, so
    the rendered flow bit assignments fit the definition's vectors.
    """
    target = bits_value(pred.threshold.bits, model)
    value, flow = _augment(pred, _edge_capacities(pred, model), target)
    if value < target:
        raise ValueError("predicate is false: no flow witness")
    return flow


def min_cut(pred: MaxFlowPredicate, model: Mapping[int, bool]) -> tuple[set[int], list[int]]:
    """(source side, crossing edge indices) of a minimum cut."""
    caps = _edge_capacities(pred, model)
    _, flow = _augment(pred, caps, None)
    seen = {pred.source}
    queue = deque([pred.source])
    g = pred.graph
    while queue:
        u = queue.popleft()
        for idx, (a, b, _) in enumerate(g.edges):
            if a == u and b not in seen and caps[idx] - flow[idx] > 0:
                seen.add(b)
                queue.append(b)
            elif b == u and a not in seen and flow[idx] > 0:
                seen.add(a)
                queue.append(a)
    crossing = [
        idx
        for idx, (a, b, _) in enumerate(g.edges)
        if a in seen and b not in seen
    ]
    return seen, crossing


def _product_bits(
    g: SymbolicGraph,
    edge_bit: dict[int, Bit],
    cap_bit_of: dict[int, list[Bit]],
    alloc: VarAlloc,
    gates: list[Gate],
    out: list[Clause],
) -> dict[int, list[Bit]]:
    prods: dict[int, list[Bit]] = {}
    for idx in range(len(g.edges)):
        prods[idx] = [
            materialize_product([edge_bit[idx], cb], alloc, gates, out)
            for cb in cap_bit_of[idx]
        ]
    return prods


def _all_cuts(pred: MaxFlowPredicate) -> list[frozenset[int]]:
    """Source sides of every s-t cut, in deterministic mask order."""
    g = pred.graph
    middle = [n for n in range(g.nodes) if n not in (pred.source, pred.target)]
    if g.nodes > CUT_ENUMERATION_LIMIT:
        raise ValueError(
            f"cut enumeration limited to {CUT_ENUMERATION_LIMIT} nodes"
        )
    cuts = []
    for mask in range(2 ** len(middle)):
        side = {pred.source}
        side.update(n for j, n in enumerate(middle) if (mask >> j) & 1)
        cuts.append(frozenset(side))
    return cuts


def maxflow_definition(
    pred: MaxFlowPredicate, sign: int, fresh_var_base: int
) -> BuiltDefinition:
    """Monotonic definition of (±)(max-flow >= threshold)."""
    if sign > 0:
        return _positive_definition(pred, fresh_var_base)
    return _negative_definition(pred, fresh_var_base)


def _positive_definition(pred: MaxFlowPredicate, base: int) -> BuiltDefinition:
    g = pred.graph
    alloc = VarAlloc(base)
    gates: list[Gate] = []
    out: list[Clause] = []
    edge_bit: dict[int, Bit] = {}
    cap_bit_of: dict[int, list[Bit]] = {}
    for idx, (_, _, ev) in enumerate(g.edges):
        r = alloc.fresh()
        out.append((-ev, r))
        gates.append((r, lambda x: x, (ev,)))
        edge_bit[idx] = r
        row: list[Bit] = []
        for cb in pred.graph.capacities[idx].bits:
            if isinstance(cb, bool):
                row.append(cb)
                continue
            rc = alloc.fresh()
            out.append((-cb, rc))
            gates.append((rc, lambda x: x, (cb,)))
            row.append(rc)
        cap_bit_of[idx] = row
    prods = _product_bits(g, edge_bit, cap_bit_of, alloc, gates, out)

    gz_atoms = []
    for side in _all_cuts(pred):
        crossing = [
            idx for idx, (a, b, _) in enumerate(g.edges) if a in side and b not in side
        ]
        cap_sum = sum_vectors([prods[i] for i in crossing], alloc, gates, out)
        gz = alloc.fresh()
        chain_clauses, atoms = le_chain(pred.threshold.bits, cap_sum, -gz, alloc, gates)
        out.extend(chain_clauses)
        gates.append(
            (
                gz,
                lambda eq, *fired: not (eq or any(fired)),
                tuple([atoms.at_or_above[0]] + atoms.strict[:-1]),
            )
        )
        gz_atoms.append(gz)
    allok = alloc.fresh()
    out.append(tuple(gz_atoms) + (allok,))
    gates.append((allok, lambda *gz: not any(gz), tuple(gz_atoms)))
    out.append((-allok, pred.predicate_var))
    defn = MonotonicDefinition(
        out, pred.predicate_var, 1, pred.input_polarity(), name="maxflow+"
    ).check()
    return BuiltDefinition(defn, gates, {"gz_atoms": gz_atoms, "allok": allok})


def _negative_definition(pred: MaxFlowPredicate, base: int) -> BuiltDefinition:
    g = pred.graph
    alloc = VarAlloc(base)
    gates: list[Gate] = []
    out: list[Clause] = []
    head = -pred.predicate_var
    flow_bits: dict[int, list[int]] = {}
    for idx in range(len(g.edges)):
        flow_bits[idx] = alloc.fresh_list(len(pred.graph.capacities[idx].bits))
    # capacity: flow_e > (e and cap_e) forces the violation head
    for idx, (_, _, ev) in enumerate(g.edges):
        guarded: list[Bit] = [
            False if cb is False else ((ev,) if cb is True else (ev, cb))
            for cb in pred.graph.capacities[idx].bits
        ]
        chain_clauses, _ = gt_chain(flow_bits[idx], guarded, head, alloc, gates)
        out.extend(chain_clauses)
    # conservation: out_j > in_j forces the head, for every j except the ends
    for j in range(g.nodes):
        if j in (pred.source, pred.target):
            continue
        outgoing = [flow_bits[i] for i, (a, _, _) in enumerate(g.edges) if a == j]
        incoming = [flow_bits[i] for i, (_, b, _) in enumerate(g.edges) if b == j]
        if not outgoing:
            continue
        out_sum = sum_vectors(outgoing, alloc, gates, out)
        in_sum = sum_vectors(incoming, alloc, gates, out)
        chain_clauses, _ = gt_chain(out_sum, in_sum, head, alloc, gates)
        out.extend(chain_clauses)
    # sink: renamed-threshold + out_t > in_t forces the head
    z_renamed: list[Bit] = []
    for zb in pred.threshold.bits:
        if isinstance(zb, bool):
            z_renamed.append(zb)
            continue
        r = alloc.fresh()
        out.append((-zb, r))
        gates.append((r, lambda x: x, (zb,)))
        z_renamed.append(r)
    out_t = [flow_bits[i] for i, (a, _, _) in enumerate(g.edges) if a == pred.target]
    in_t = [flow_bits[i] for i, (_, b, _) in enumerate(g.edges) if b == pred.target]
    lhs = sum_vectors([z_renamed] + out_t, alloc, gates, out)
    rhs = sum_vectors(in_t, alloc, gates, out)
    chain_clauses, _ = gt_chain(lhs, rhs, head, alloc, gates)
    out.extend(chain_clauses)
    inputs = {v: -p for v, p in pred.input_polarity().items()}
    defn = MonotonicDefinition(
        out, pred.predicate_var, -1, inputs, name="maxflow-"
    ).check()
    return BuiltDefinition(defn, gates, {"flow_bits": flow_bits})


def cut_witness_mf(
    built_pos: BuiltDefinition, pred: MaxFlowPredicate, assignment: Mapping[int, bool]
) -> tuple[Lit, ...]:
    """Witness for a negative lemma: auxiliaries of the positive definition.

    The assignment must make the predicate false; the simulated values embed
    the deficient cut and the saturating capacity bounds.
    """
    completion = extremal_completion(built_pos.defn.inputs, assignment)
    if eval_maxflow(pred, completion):
        raise ValueError("predicate is true: no cut witness")
    return built_pos.witness_literals(completion)


def flow_witness_literals(
    built_neg: BuiltDefinition, pred: MaxFlowPredicate, assignment: Mapping[int, bool]
) -> tuple[Lit, ...]:
    """Witness for a positive lemma: flow bits plus simulated auxiliaries."""
    completion = extremal_completion(built_neg.defn.inputs, assignment)
    flow = flow_witness(pred, completion)
    seeds: dict[int, bool] = {}
    for idx, bits in built_neg.meta["flow_bits"].items():
        for i, b in enumerate(bits):
            seeds[b] = bool((flow[idx] >> i) & 1)
    return built_neg.witness_literals(completion, seeds)


class MaxFlowBackend:
    """Kernel backend for one max-flow predicate."""

    def __init__(
        self,
        pred: MaxFlowPredicate,
        built_pos: BuiltDefinition,
        built_neg: BuiltDefinition,
    ):
        self.pred = pred
        self.built_pos = built_pos
        self.built_neg = built_neg
        self.polarity = pred.input_polarity()
        self.inputs = tuple(sorted(self.polarity))

    def evaluate(self, model):
        return eval_maxflow(self.pred, model)

    def strengthen(self, sign, assigned, completion):
        m_a = tuple(
            (v if assigned[v] else -v)
            for v in self.inputs
            if v in assigned
            and (sign > 0) == (assigned[v] == (self.polarity[v] > 0))
        )
        if sign > 0:
            witness = flow_witness_literals(self.built_neg, self.pred, assigned)
        else:
            witness = cut_witness_mf(self.built_pos, self.pred, assigned)
        return m_a, witness
