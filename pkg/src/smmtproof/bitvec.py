"""Bit-vector comparison and summation-comparison theories.

Bits are little-endian and may be constants, literals, or conjunctions of
literals (used for capacity-times-edge products). Comparison definitions are
most-significant-bit chains that are Horn after the monotone rewrite and are
used directly for both lemma polarities; summation definitions rename their
inputs apart (the MonoT step), run biconditional ripple-carry adders over the
renamed bits, and discharge opposite-polarity lemmas via witnesses that
assign every auxiliary its simulated value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .cnf import Clause, Lit, var_of
from .monohorn import MonotonicDefinition

Bit = bool | int | tuple[int, ...]  # constant, literal, or conjunction of literals


class VarAlloc:
    """Deterministic fresh-variable counter."""

    def __init__(self, base: int):
        self.top = base

    def fresh(self) -> int:
        self.top += 1
        return self.top

    def fresh_list(self, n: int) -> list[int]:
        return [self.fresh() for _ in range(n)]


@dataclass
class BitVector:
    """Little-endian vector of bits."""

    bits: tuple[Bit, ...]

    @classmethod
    def of_vars(cls, variables: Sequence[int]) -> "BitVector":
        return cls(tuple(variables))

    @classmethod
    def const(cls, value: int, width: int) -> "BitVector":
        if value < 0 or (width and value >> width):
            raise ValueError(f"constant {value} does not fit in {width} bits")
        return cls(tuple(bool((value >> i) & 1) for i in range(width)))

    @property
    def width(self) -> int:
        return len(self.bits)

    def var_bits(self) -> list[int]:
        out = []
        for b in self.bits:
            if isinstance(b, bool):
                continue
            if isinstance(b, tuple):
                out.extend(var_of(l) for l in b)
            else:
                out.append(var_of(b))
        return out


def bit_value(bit: Bit, model: Mapping[int, bool]) -> bool:
    if isinstance(bit, bool):
        return bit
    if isinstance(bit, tuple):
        return all(bit_value(l, model) for l in bit)
    return model[var_of(bit)] == (bit > 0)


def bits_value(bits: Sequence[Bit], model: Mapping[int, bool]) -> int:
    return sum(1 << i for i, b in enumerate(bits) if bit_value(b, model))


def _pad(a: Sequence[Bit], b: Sequence[Bit]) -> tuple[list[Bit], list[Bit]]:
    k = max(len(a), len(b))
    return list(a) + [False] * (k - len(a)), list(b) + [False] * (k - len(b))


def _negate_bit(bit: Bit) -> list[list[Lit]]:
    """CNF of ¬bit as literal lists to splice into a clause (single clause)."""
    if isinstance(bit, tuple):
        return [[-l for l in bit]]
    if isinstance(bit, bool):
        raise AssertionError("constant handled by caller")
    return [[-bit]]


def _emit(slots: Sequence[tuple[int, Bit]], out: list[Clause]) -> None:
    """Emit the clause(s) for a list of (sign, bit) slots with const folding.

    A positively-occurring conjunction multiplies the clause (one copy per
    conjunct); a negated conjunction splices in the negated literals.
    """
    bases: list[list[Lit]] = [[]]
    for sign, bit in slots:
        if isinstance(bit, bool):
            if (bit and sign > 0) or (not bit and sign < 0):
                return  # clause satisfied
            continue  # literal falsified: drop
        if isinstance(bit, tuple):
            if any(l is False for l in bit):
                if sign < 0:
                    return  # negated false conjunction: clause satisfied
                continue  # positive false conjunction: literal falsified
            lits = [l for l in bit if not isinstance(l, bool)]
            if not lits:
                if sign > 0:
                    return  # conjunction of constants True
                continue
            if sign > 0:
                bases = [b + [l] for b in bases for l in lits]
            else:
                addition = [-l for l in lits]
                bases = [b + addition for b in bases]
            continue
        lit = bit if sign > 0 else -bit
        bases = [b + [lit] for b in bases]
    for b in bases:
        out.append(tuple(b))


Gate = tuple[int, Callable[..., bool], tuple[Bit, ...]]


@dataclass
class ChainAtoms:
    """Auxiliary atoms of one comparison chain, plus simulation gates."""

    at_or_above: list[int]  # ge_i / le_i, index 0..k
    strict: list[int]  # gt_i / lt_i, index 0..k


def _compare_chain(
    a: Sequence[Bit],
    b: Sequence[Bit],
    head_lit: Lit,
    alloc: VarAlloc,
    mode: str,
    gates: list[Gate],
    include_equal_head: bool,
) -> tuple[list[Clause], ChainAtoms]:
    """Shared MSB-first chain for 'a > b' (mode 'gt') or 'a <= b' (mode 'le').

    mode 'gt': derives head when val(a) > val(b); a appears negatively,
    b positively. mode 'le': derives head when val(a) <= val(b); a appears
    positively, b negatively, and the index-0 at-or-above atom also implies
    the head (the equality case).
    """
    a, b = _pad(a, b)
    k = len(a)
    above = alloc.fresh_list(k + 1)  # index i holds atom for position i
    strict = alloc.fresh_list(k + 1)
    out: list[Clause] = []
    sa, sb = (-1, 1) if mode == "gt" else (1, -1)
    for i in range(k - 1, -1, -1):
        _emit([(-1, above[i + 1]), (sa, a[i]), (sb, b[i]), (1, strict[i])], out)
        _emit([(-1, above[i + 1]), (sa, a[i]), (1, above[i])], out)
        _emit([(-1, above[i + 1]), (sb, b[i]), (1, above[i])], out)
    for i in range(k):
        out.append((-strict[i], head_lit))
    if include_equal_head:
        out.append((-above[0], head_lit))
    out.append((above[k],))
    out.append((-strict[k],))

    def cont(av: bool, bv: bool) -> bool:
        return (av or not bv) if mode == "gt" else (not av or bv)

    def strictly(av: bool, bv: bool) -> bool:
        return (av and not bv) if mode == "gt" else (not av and bv)

    gates.append((above[k], lambda: True, ()))
    gates.append((strict[k], lambda: False, ()))
    for i in range(k - 1, -1, -1):
        gates.append(
            (above[i], lambda up, av, bv: up and cont(av, bv), (above[i + 1], a[i], b[i]))
        )
        gates.append(
            (strict[i], lambda up, av, bv: up and strictly(av, bv), (above[i + 1], a[i], b[i]))
        )
    return out, ChainAtoms(above, strict)


def gt_chain(a, b, head_lit, alloc, gates):
    """Clauses deriving head_lit whenever val(a) > val(b)."""
    return _compare_chain(a, b, head_lit, alloc, "gt", gates, include_equal_head=False)


def le_chain(a, b, head_lit, alloc, gates):
    """Clauses deriving head_lit whenever val(a) <= val(b)."""
    return _compare_chain(a, b, head_lit, alloc, "le", gates, include_equal_head=True)


def _tseitin_fn(
    inputs: Sequence[Bit], fn: Callable[..., bool], alloc: VarAlloc, gates: list[Gate], out: list[Clause]
) -> Bit:
    """Biconditionally define fn(inputs) with constant folding and aliasing."""
    consts = [b for b in inputs if isinstance(b, bool)]
    variables = [b for b in inputs if not isinstance(b, bool)]
    if any(isinstance(b, tuple) for b in variables):
        raise AssertionError("materialize products before arithmetic")
    n = len(variables)
    outcomes = []
    for mask in range(2 ** n):
        vals = iter((mask >> i) & 1 for i in range(n))
        full = [b if isinstance(b, bool) else bool(next(vals)) for b in inputs]
        outcomes.append(fn(*full))
    if all(o == outcomes[0] for o in outcomes):
        return outcomes[0]
    for j in range(n):
        if all(outcomes[m] == bool((m >> j) & 1) for m in range(2 ** n)):
            return variables[j]
        if all(outcomes[m] == (not ((m >> j) & 1)) for m in range(2 ** n)):
            return -variables[j]
    o = alloc.fresh()
    for mask in range(2 ** n):
        clause = []
        for j, v in enumerate(variables):
            clause.append(-v if (mask >> j) & 1 else v)
        clause.append(o if outcomes[mask] else -o)
        out.append(tuple(clause))
    gates.append((o, fn, tuple(inputs)))
    return o


def ripple_add(
    xs: Sequence[Bit], ys: Sequence[Bit], alloc: VarAlloc, gates: list[Gate], out: list[Clause]
) -> list[Bit]:
    """Full-adder chain; output is one bit wider than the widest operand."""
    xs, ys = _pad(xs, ys)
    width = len(xs) + 1
    xs = xs + [False]
    ys = ys + [False]
    carry: Bit = False
    sums: list[Bit] = []
    for i in range(width):
        s = _tseitin_fn(
            (xs[i], ys[i], carry), lambda x, y, c: x ^ y ^ c, alloc, gates, out
        )
        carry = _tseitin_fn(
            (xs[i], ys[i], carry),
            lambda x, y, c: (x and y) or (x and c) or (y and c),
            alloc,
            gates,
            out,
        )
        sums.append(s)
    return sums


def sum_vectors(
    vectors: Sequence[Sequence[Bit]], alloc: VarAlloc, gates: list[Gate], out: list[Clause]
) -> list[Bit]:
    """Left-to-right ripple-carry summation network."""
    if not vectors:
        return [False]
    acc = list(vectors[0])
    for v in vectors[1:]:
        acc = ripple_add(acc, v, alloc, gates, out)
    return acc


def materialize_product(
    lits: Iterable[Lit | bool], alloc: VarAlloc, gates: list[Gate], out: list[Clause]
) -> Bit:
    """Biconditional product variable for a conjunction of literals."""
    parts: list[Lit] = []
    for l in lits:
        if isinstance(l, bool):
            if not l:
                return False
            continue
        parts.append(l)
    if not parts:
        return True
    if len(parts) == 1:
        return parts[0]
    p = alloc.fresh()
    out.append(tuple([-l for l in parts] + [p]))
    for l in parts:
        out.append((l, -p))
    gates.append((p, lambda *vs: all(vs), tuple(parts)))
    return p


@dataclass
class BuiltDefinition:
    """A monotonic definition together with its simulation gates."""

    defn: MonotonicDefinition
    gates: list[Gate] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def simulate(
        self, completion: Mapping[int, bool], seeds: Mapping[int, bool] | None = None
    ) -> dict[int, bool]:
        """Values of every gate output under a total input assignment.

        `seeds` pre-assigns auxiliaries that are not gate outputs (e.g. the
        flow bits of the max-flow definition).
        """
        values = dict(completion)
        if seeds:
            values.update(seeds)
        for var, fn, in_bits in self.gates:
            values[var] = fn(*(bit_value(b, values) for b in in_bits))
        return values

    def witness_literals(
        self, completion: Mapping[int, bool], seeds: Mapping[int, bool] | None = None
    ) -> tuple[Lit, ...]:
        values = self.simulate(completion, seeds)
        aux = sorted(self.defn.aux_vars())
        missing = [v for v in aux if v not in values]
        if missing:
            raise AssertionError(f"gates do not cover auxiliaries {missing}")
        return tuple(v if values[v] else -v for v in aux)


@dataclass
class CmpPredicate:
    """lhs > rhs (strict) or lhs >= rhs."""

    lhs: BitVector
    rhs: BitVector
    predicate_var: int
    strict: bool = True

    def input_polarity(self) -> dict[int, int]:
        pol: dict[int, int] = {}
        for v in self.lhs.var_bits():
            pol[v] = 1
        for v in self.rhs.var_bits():
            pol[v] = -1
        return pol


@dataclass
class SumCmpPredicate:
    """sum(vectors_a) > sum(vectors_b)."""

    vectors_a: list[BitVector]
    vectors_b: list[BitVector]
    predicate_var: int

    def input_polarity(self) -> dict[int, int]:
        pol: dict[int, int] = {}
        for v in self.vectors_a:
            for x in v.var_bits():
                pol[x] = 1
        for v in self.vectors_b:
            for x in v.var_bits():
                pol[x] = -1
        return pol


def eval_cmp(pred: CmpPredicate, model: Mapping[int, bool]) -> bool:
    a = bits_value(pred.lhs.bits, model)
    b = bits_value(pred.rhs.bits, model)
    return a > b if pred.strict else a >= b


def eval_sumcmp(pred: SumCmpPredicate, model: Mapping[int, bool]) -> bool:
    a = sum(bits_value(v.bits, model) for v in pred.vectors_a)
    b = sum(bits_value(v.bits, model) for v in pred.vectors_b)
    return a > b


def cmp_positive_definition(pred: CmpPredicate, fresh_var_base: int) -> BuiltDefinition:
    """Horn (after rewrite) definition deriving the positive comparison atom."""
    alloc = VarAlloc(fresh_var_base)
    gates: list[Gate] = []
    if pred.strict:
        clauses, _ = gt_chain(pred.lhs.bits, pred.rhs.bits, pred.predicate_var, alloc, gates)
    else:
        clauses, _ = le_chain(pred.rhs.bits, pred.lhs.bits, pred.predicate_var, alloc, gates)
    defn = MonotonicDefinition(
        clauses, pred.predicate_var, 1, pred.input_polarity(), name="cmp+"
    ).check()
    return BuiltDefinition(defn, gates)


def cmp_negative_definition(pred: CmpPredicate, fresh_var_base: int) -> BuiltDefinition:
    """Horn (after rewrite) definition deriving the negated comparison atom."""
    alloc = VarAlloc(fresh_var_base)
    gates: list[Gate] = []
    if pred.strict:
        clauses, _ = le_chain(pred.lhs.bits, pred.rhs.bits, -pred.predicate_var, alloc, gates)
    else:
        clauses, _ = gt_chain(pred.rhs.bits, pred.lhs.bits, -pred.predicate_var, alloc, gates)
    inputs = {v: -p for v, p in pred.input_polarity().items()}
    defn = MonotonicDefinition(
        clauses, pred.predicate_var, -1, inputs, name="cmp-"
    ).check()
    return BuiltDefinition(defn, gates)


def _rename_side(
    vectors: Sequence[BitVector],
    keep_high: bool,
    alloc: VarAlloc,
    gates: list[Gate],
    out: list[Clause],
) -> list[list[Bit]]:
    """MonoT renaming of one operand side.

    keep_high renames v upward (v => v'), used for the side whose increase
    helps the defined atom; otherwise downward (v' => v).
    """
    renamed: list[list[Bit]] = []
    for vec in vectors:
        row: list[Bit] = []
        for b in vec.bits:
            if isinstance(b, bool):
                row.append(b)
                continue
            if isinstance(b, tuple):
                b = materialize_product(b, alloc, gates, out)
                if isinstance(b, bool):
                    row.append(b)
                    continue
            r = alloc.fresh()
            if keep_high:
                out.append((-b, r))
            else:
                out.append((b, -r))
            gates.append((r, lambda x: x, (b,)))
            row.append(r)
        renamed.append(row)
    return renamed


def sumcmp_definition(
    pred: SumCmpPredicate, sign: int, fresh_var_base: int
) -> BuiltDefinition:
    """Monotonic definition of (±) sum(A) > sum(B) via renamed adder networks."""
    alloc = VarAlloc(fresh_var_base)
    gates: list[Gate] = []
    out: list[Clause] = []
    a_renamed = _rename_side(pred.vectors_a, sign > 0, alloc, gates, out)
    b_renamed = _rename_side(pred.vectors_b, sign < 0, alloc, gates, out)
    sum_a = sum_vectors(a_renamed, alloc, gates, out)
    sum_b = sum_vectors(b_renamed, alloc, gates, out)
    inner = alloc.fresh()
    if sign > 0:
        chain_clauses, atoms = gt_chain(sum_a, sum_b, inner, alloc, gates)
        link = (-inner, pred.predicate_var)
        gates.append(
            (inner, lambda *fired: any(fired), tuple(atoms.strict[:-1]))
        )
    else:
        chain_clauses, atoms = le_chain(sum_a, sum_b, -inner, alloc, gates)
        link = (inner, -pred.predicate_var)
        gates.append(
            (
                inner,
                lambda eq, *fired: not (eq or any(fired)),
                tuple([atoms.at_or_above[0]] + atoms.strict[:-1]),
            )
        )
    clauses = out + chain_clauses + [link]
    inputs = {v: sign * p for v, p in pred.input_polarity().items()}
    defn = MonotonicDefinition(
        clauses,
        pred.predicate_var,
        sign,
        inputs,
        name=f"sumcmp{'+' if sign > 0 else '-'}",
    ).check()
    meta = {
        "renamed_a": a_renamed,
        "renamed_b": b_renamed,
        "sum_a": sum_a,
        "sum_b": sum_b,
        "inner": inner,
    }
    return BuiltDefinition(defn, gates, meta)


def extremal_completion(
    polarity: Mapping[int, int], assigned: Mapping[int, bool], toward_max: bool = True
) -> dict[int, bool]:
    """Complete an input assignment toward a monotone-extremal corner.

    `polarity` is with respect to the atom being maximized (toward_max) or
    minimized.
    """
    out = {}
    for v, pol in polarity.items():
        if v in assigned:
            out[v] = assigned[v]
        else:
            out[v] = (pol > 0) == toward_max
    return out


def bound_witness(
    built: BuiltDefinition, sign: int, assigned: Mapping[int, bool]
) -> tuple[Lit, ...]:
    """Witness for a lemma with head sign `sign` against the opposite definition.

    `built` must be the definition of the opposite atom (-sign); the witness
    assigns every auxiliary the value obtained by simulating the gates under
    the completion of the assigned inputs toward the defined atom's maximum
    (i.e. the lemma head's hardest case).
    """
    if built.defn.head_sign != -sign:
        raise ValueError("witness must target the opposite-polarity definition")
    completion = extremal_completion(built.defn.inputs, assigned, toward_max=True)
    return built.witness_literals(completion)


class CmpBackend:
    """Kernel backend for a single comparison predicate."""

    def __init__(self, pred: CmpPredicate):
        self.pred = pred
        self.polarity = pred.input_polarity()
        self.inputs = tuple(sorted(self.polarity))

    def evaluate(self, model):
        return eval_cmp(self.pred, model)

    def strengthen(self, sign, assigned, completion):
        m_a = _monotone_assigned(self.inputs, self.polarity, assigned, sign)
        return m_a, ()


class SumBackend:
    """Kernel backend for a summation comparison, with bound-value witnesses."""

    def __init__(self, pred: SumCmpPredicate, built_pos: BuiltDefinition, built_neg: BuiltDefinition):
        self.pred = pred
        self.built = {1: built_pos, -1: built_neg}
        self.polarity = pred.input_polarity()
        self.inputs = tuple(sorted(self.polarity))

    def evaluate(self, model):
        return eval_sumcmp(self.pred, model)

    def strengthen(self, sign, assigned, completion):
        m_a = _monotone_assigned(self.inputs, self.polarity, assigned, sign)
        witness = bound_witness(self.built[-sign], sign, assigned)
        return m_a, witness


def _monotone_assigned(inputs, polarity, assigned, sign) -> tuple[Lit, ...]:
    out = []
    for v in inputs:
        if v not in assigned:
            continue
        helping = assigned[v] == (polarity[v] > 0)
        if (sign > 0) == helping:
            out.append(v if assigned[v] else -v)
    return tuple(out)
