import random
from itertools import product

import pytest

from smmtproof.cnf import Assignment, CnfFormula, is_horn, rup_check, unit_propagate
from smmtproof.bitvec import (
    BitVector,
    CmpPredicate,
    SumCmpPredicate,
    VarAlloc,
    bits_value,
    bound_witness,
    cmp_negative_definition,
    cmp_positive_definition,
    eval_cmp,
    eval_sumcmp,
    ripple_add,
    sumcmp_definition,
)
from smmtproof.monohorn import (
    ConditionOneViolated,
    NonHornResidual,
    lemma_specific_horn,
    verify_lemma,
)
from smmtproof.kernel import make_lemma
from helpers import backtrack_implies, backtrack_satisfiable, lemma_valid_bruteforce


def model_from(lits):
    return {abs(l): l > 0 for l in lits}


def vec(variables):
    return BitVector.of_vars(variables)


def test_eval_cmp_basic():
    # a = 10b (a0=var1, a1=var2), b = 01b
    pred = CmpPredicate(vec([1, 2]), vec([3, 4]), 5)
    m = model_from([-1, 2, 3, -4])
    assert eval_cmp(pred, m)  # 2 > 1
    assert not eval_cmp(pred, model_from([1, -2, 3, -4]))  # 1 > 1 fails


def test_eval_sumcmp_equality_edge():
    pred = SumCmpPredicate([vec([1, 2]), vec([3, 4])], [vec([5, 6])], 7)
    m = model_from([1, -2, 3, -4, -5, 6])  # 1 + 1 > 2 is false
    assert not eval_sumcmp(pred, m)


def test_eval_sumcmp_matches_integer_oracle():
    rng = random.Random(9)
    for _ in range(50):
        widths = [rng.randint(1, 4) for _ in range(3)]
        nxt = 0
        vs = []
        for w in widths:
            vs.append(vec(list(range(nxt + 1, nxt + 1 + w))))
            nxt += w
        pred = SumCmpPredicate(vs[:2], vs[2:], nxt + 1)
        m = {v: rng.random() < 0.5 for v in range(1, nxt + 1)}
        lhs = sum(bits_value(v.bits, m) for v in vs[:2])
        rhs = bits_value(vs[2].bits, m)
        assert eval_sumcmp(pred, m) == (lhs > rhs)


def test_cmp_positive_definition_k1_clauses():
    built = cmp_positive_definition(CmpPredicate(vec([1]), vec([2]), 3), 3)
    # ge0=4, ge1=5, gt0=6, gt1=7
    assert built.defn.clauses == [
        (-5, -1, 2, 6),
        (-5, -1, 4),
        (-5, 2, 4),
        (-6, 3),
        (5,),
        (-7,),
    ]
    assert built.defn.is_horn_rewritten()
    assert not is_horn(CnfFormula(0, built.defn.clauses))  # Horn only after rewrite
    assert not built.defn.lint()


def test_cmp_negative_definition_has_equality_head_and_units():
    built = cmp_negative_definition(CmpPredicate(vec([1]), vec([2]), 3), 3)
    # le0=4, le1=5, lt0=6, lt1=7
    assert (5,) in built.defn.clauses and (-7,) in built.defn.clauses
    assert (-4, -3) in built.defn.clauses  # le_0 => ¬p
    assert built.defn.is_horn_rewritten()
    assert not built.defn.lint()


def all_bit_models(nv):
    for bits in product((False, True), repeat=nv):
        yield {v: bits[v - 1] for v in range(1, nv + 1)}


@pytest.mark.parametrize("strict", [True, False])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_cmp_definitions_are_propositional_definitions(strict, k):
    lhs = vec(list(range(1, k + 1)))
    rhs = vec(list(range(k + 1, 2 * k + 1)))
    pred = CmpPredicate(lhs, rhs, 2 * k + 1, strict=strict)
    pos = cmp_positive_definition(pred, 2 * k + 1)
    top = max(v for c in pos.defn.clauses for v in map(abs, c))
    negd = cmp_negative_definition(pred, top)
    for m in all_bit_models(2 * k):
        units = [v if m[v] else -v for v in range(1, 2 * k + 1)]
        value = eval_cmp(pred, m)
        # Def. 2 for the positive side
        assert backtrack_satisfiable(pos.defn.clauses, units)
        assert backtrack_implies(pos.defn.clauses, units, pred.predicate_var) == value
        # and for the negative side
        assert backtrack_satisfiable(negd.defn.clauses, units)
        assert (
            backtrack_implies(negd.defn.clauses, units, -pred.predicate_var)
            == (not value)
        )


def test_cmp_valid_lemmas_rup_both_polarities():
    k = 2
    pred = CmpPredicate(vec([1, 2]), vec([3, 4]), 5)
    pos = cmp_positive_definition(pred, 5)
    negd = cmp_negative_definition(pred, 40)
    fp = CnfFormula(0, pos.defn.clauses)
    fn = CnfFormula(0, negd.defn.clauses)
    inputs = [1, 2, 3, 4]
    pol = pred.input_polarity()
    for choice in product((0, 1, -1), repeat=4):
        m_a_pos = []
        m_a_neg = []
        for v, c in zip(inputs, choice):
            if c == 0:
                continue
            lit = v if c > 0 else -v
            if (c > 0) == (pol[v] > 0):
                m_a_pos.append(lit)
            else:
                m_a_neg.append(lit)
        # positive lemma from the monotone-helping assigned literals
        valid = lemma_valid_bruteforce(
            lambda m: eval_cmp(pred, m), inputs, m_a_pos, 1
        )
        clause = tuple(-l for l in m_a_pos) + (5,)
        assert rup_check(fp, clause) == valid
        valid_n = lemma_valid_bruteforce(
            lambda m: eval_cmp(pred, m), inputs, m_a_neg, -1
        )
        clause_n = tuple(-l for l in m_a_neg) + (-5,)
        assert rup_check(fn, clause_n) == valid_n


def test_ripple_add_forces_integer_sums():
    rng = random.Random(15)
    for wx, wy in [(1, 1), (2, 1), (2, 2), (3, 2)]:
        xs = list(range(1, wx + 1))
        ys = list(range(wx + 1, wx + wy + 1))
        alloc = VarAlloc(wx + wy)
        gates = []
        out = []
        sums = ripple_add(xs, ys, alloc, gates, out)
        f = CnfFormula(0, out)
        for m in all_bit_models(wx + wy):
            units = [v if m[v] else -v for v in range(1, wx + wy + 1)]
            res = unit_propagate(f, Assignment(units))
            assert res.ok
            got = bits_value(sums, res.assignment.values)
            assert got == bits_value(xs, m) + bits_value(ys, m)


def test_sumcmp_definition_structure():
    pred = SumCmpPredicate([vec([1, 2])], [vec([3, 4])], 5)
    pos = sumcmp_definition(pred, 1, 5)
    clauses = pos.defn.clauses
    renames = [c for c in clauses if len(c) == 2 and abs(c[0]) in (1, 2, 3, 4)]
    assert len(renames) == 4  # one renaming clause per input bit
    links = [c for c in clauses if 5 in c or -5 in c]
    assert len(links) == 1  # a single linking clause beyond network and chain
    assert not is_horn(CnfFormula(0, clauses))  # adders are not Horn
    assert not pos.defn.is_horn_rewritten()
    assert not pos.defn.lint()
    negd = sumcmp_definition(pred, -1, 200)
    assert not negd.defn.lint()


@pytest.mark.parametrize("sign", [1, -1])
def test_sumcmp_definition_is_propositional_definition(sign):
    pred = SumCmpPredicate([vec([1])], [vec([2])], 3)
    built = sumcmp_definition(pred, sign, 3)
    for m in all_bit_models(2):
        units = [v if m[v] else -v for v in (1, 2)]
        value = eval_sumcmp(pred, m)
        want = value if sign > 0 else not value
        assert backtrack_satisfiable(built.defn.clauses, units)
        assert (
            backtrack_implies(built.defn.clauses, units, sign * 3) == want
        )


def test_bound_witness_carries_concrete_sums():
    # A forced >= 2, B <= 1: positive lemma discharged from the negative
    # definition; the witness pins sum bits to 10b vs 01b.
    pred = SumCmpPredicate([vec([1, 2])], [vec([3, 4])], 5)
    negd = sumcmp_definition(pred, -1, 5)
    assigned = {2: True, 4: False}  # a1 = 1, b1 = 0
    witness = bound_witness(negd, 1, assigned)
    values = dict(negd.simulate({1: False, 2: True, 3: True, 4: False}))
    assert bits_value(negd.meta["sum_a"], values) == 2
    assert bits_value(negd.meta["sum_b"], values) == 1
    wset = set(witness)
    for b in negd.meta["sum_a"] + negd.meta["sum_b"]:
        if isinstance(b, int):
            assert (abs(b) if values[abs(b)] == (b > 0) else -abs(b)) in wset


def test_bound_witness_total_assignment_is_circuit_simulation():
    pred = SumCmpPredicate([vec([1])], [vec([2])], 3)
    pos = sumcmp_definition(pred, 1, 3)
    assigned = {1: True, 2: False}
    witness = bound_witness(pos, -1, assigned)
    sim = pos.simulate(assigned)
    for l in witness:
        assert sim[abs(l)] == (l > 0)


def test_bound_witness_wrong_side_rejected():
    pred = SumCmpPredicate([vec([1])], [vec([2])], 3)
    pos = sumcmp_definition(pred, 1, 3)
    with pytest.raises(ValueError):
        bound_witness(pos, 1, {})


def sum_lemma_roundtrip(pred, sign, m_a, built_opposite, base):
    lemma = make_lemma(
        m_a, pred.predicate_var, sign,
        bound_witness(built_opposite, sign, {abs(l): l > 0 for l in m_a}),
    )
    try:
        bound = lemma_specific_horn(built_opposite.defn, lemma, base)
    except (ConditionOneViolated, NonHornResidual):
        return None
    return verify_lemma(bound, lemma)


def test_sum_lemma_discharge_exhaustive():
    # every monotone partial assignment over two 2-bit vectors, both lemma
    # polarities: discharge succeeds exactly for brute-force-valid lemmas
    pred = SumCmpPredicate([vec([1, 2])], [vec([3, 4])], 5)
    pos = sumcmp_definition(pred, 1, 5)
    negd = sumcmp_definition(pred, -1, 300)
    pol = pred.input_polarity()
    inputs = [1, 2, 3, 4]
    for choice in product((0, 1, -1), repeat=4):
        lits = [
            (v if c > 0 else -v) for v, c in zip(inputs, choice) if c != 0
        ]
        m_a_pos = [l for l in lits if (l > 0) == (pol[abs(l)] > 0)]
        m_a_neg = [l for l in lits if (l > 0) != (pol[abs(l)] > 0)]
        valid_pos = lemma_valid_bruteforce(
            lambda m: eval_sumcmp(pred, m), inputs, m_a_pos, 1
        )
        got = sum_lemma_roundtrip(pred, 1, m_a_pos, negd, 600)
        assert (got is True) == valid_pos
        valid_neg = lemma_valid_bruteforce(
            lambda m: eval_sumcmp(pred, m), inputs, m_a_neg, -1
        )
        got_n = sum_lemma_roundtrip(pred, -1, m_a_neg, pos, 700)
        assert (got_n is True) == valid_neg


def test_sum_corrupted_witness_never_validates_invalid():
    rng = random.Random(77)
    pred = SumCmpPredicate([vec([1, 2])], [vec([3, 4])], 5)
    pos = sumcmp_definition(pred, 1, 5)
    inputs = [1, 2, 3, 4]
    pol = pred.input_polarity()
    for _ in range(200):
        lits = [
            (v if rng.random() < 0.5 else -v)
            for v in inputs
            if rng.random() < 0.7
        ]
        m_a = [l for l in lits if (l > 0) != (pol[abs(l)] > 0)]
        honest = bound_witness(pos, -1, {abs(l): l > 0 for l in m_a})
        witness = tuple(
            -w if rng.random() < 0.3 else w for w in honest
        )
        lemma = make_lemma(m_a, 5, -1, witness)
        try:
            bound = lemma_specific_horn(pos.defn, lemma, 500)
        except (ConditionOneViolated, NonHornResidual):
            continue
        if verify_lemma(bound, lemma):
            assert lemma_valid_bruteforce(
                lambda m: eval_sumcmp(pred, m), inputs, m_a, -1
            )


def test_const_bits_fold():
    pred = CmpPredicate(vec([1]), BitVector.const(1, 1), 2)
    built = cmp_positive_definition(pred, 2)
    for c in built.defn.clauses:
        assert all(abs(l) != 0 for l in c)
    # a > 1 over one bit is unsatisfiable: no assignment implies the atom
    for m in all_bit_models(1):
        units = [1 if m[1] else -1]
        assert not backtrack_implies(built.defn.clauses, units, 2)


def test_bitvector_const_roundtrip():
    bv = BitVector.const(5, 4)
    assert bits_value(bv.bits, {}) == 5
    with pytest.raises(ValueError):
        BitVector.const(16, 4)
