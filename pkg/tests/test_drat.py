import pytest

from smmtproof.cnf import CnfFormula
from smmtproof.drat import (
    ProofCertificate,
    Reason,
    RecordKind,
    backward_check,
    check_drat,
    deletion,
    learned,
    read_certificate,
    strip_theory_records,
    theory_lemma,
    write_certificate,
)
from helpers import brute_force_satisfiable, with_units


def cert(*records) -> ProofCertificate:
    return ProofCertificate(list(records))


def test_record_invariants():
    with pytest.raises(ValueError):
        theory_lemma((1, 2), 3, (4,))  # predicate var absent from clause
    with pytest.raises(ValueError):
        learned((0,))


def test_write_format():
    assert write_certificate(cert(learned((1, -2)))) == "1 -2 0\n"
    assert write_certificate(cert(deletion((1, -2)))) == "d 1 -2 0\n"
    assert (
        write_certificate(cert(theory_lemma((-3, -4, 7), 7, (8, -9))))
        == "t 7 -3 -4 7 0 8 -9 0\n"
    )
    assert write_certificate(cert(learned(()))) == "0\n"


def test_certificate_round_trip():
    c = cert(
        theory_lemma((-3, -4, 7), 7, (8, -9)),
        learned((1, -2)),
        deletion((1, -2)),
        theory_lemma((5,), 5, ()),
        learned(()),
    )
    again = read_certificate(write_certificate(c))
    assert again.records == c.records


def test_read_errors_carry_line_numbers():
    with pytest.raises(ValueError, match="line 1"):
        read_certificate("1 2\n")
    with pytest.raises(ValueError, match="line 2"):
        read_certificate("1 0\nd 1\n")
    with pytest.raises(ValueError, match="line 1"):
        read_certificate("t 7 1 2 0\n")  # missing witness section
    with pytest.raises(ValueError, match="line 1"):
        read_certificate("1 x 0\n")


def test_check_drat_trivial_unsat():
    f = CnfFormula(1, [(1,), (-1,)])
    assert check_drat(f, cert(learned(()))).verified


def test_check_drat_rejects_non_rup():
    f = CnfFormula(2, [(1, 2)])
    # oracle: f with ¬a is satisfiable, so (a) is not implied, let alone RUP
    assert brute_force_satisfiable(with_units(f, [-1]))
    v = check_drat(f, cert(learned((1,))))
    assert not v.verified and v.failed_index == 0 and v.reason is Reason.RUP_FAILED


def test_check_drat_bad_deletion_and_missing_empty():
    f = CnfFormula(2, [(1, 2)])
    v = check_drat(f, cert(deletion((1, -2))))
    assert not v.verified and v.reason is Reason.BAD_DELETION
    v2 = check_drat(f, cert())
    assert not v2.verified and v2.reason is Reason.EMPTY_CLAUSE_NOT_DERIVED


def test_check_drat_deletion_applies():
    f = CnfFormula(2, [(1,), (-1,)])
    # deleting (−1) removes the contradiction: bottom no longer derivable
    v = check_drat(f, cert(deletion((-1,)), learned(())))
    assert not v.verified and v.reason is Reason.RUP_FAILED


def test_check_drat_refuses_theory_records():
    f = CnfFormula(1, [(1,)])
    with pytest.raises(ValueError):
        check_drat(f, cert(theory_lemma((1,), 1, ())))


def unsat_square() -> CnfFormula:
    return CnfFormula(2, [(1, 2), (1, -2), (-1, 2), (-1, -2)])


def test_check_drat_monotone_in_database():
    f = unsat_square()
    base = [learned((1,)), learned(())]
    assert check_drat(f, cert(*base)).verified
    padded = [learned((1,)), learned((2,)), learned(())]
    assert check_drat(f, cert(*padded)).verified


def test_backward_check_drops_unused_record():
    f = unsat_square()
    proof = cert(learned((1,)), learned((2,)), learned(()))
    core = backward_check(f, proof)
    assert learned((2,)) not in core.records
    assert learned((1,)) in core.records
    assert check_drat(f, core).verified


def test_backward_check_requires_forward_verification():
    f = CnfFormula(2, [(1, 2)])
    with pytest.raises(ValueError):
        backward_check(f, cert(learned((1,))))
    with pytest.raises(ValueError):
        backward_check(f, cert(learned((-1, 2))))  # never reaches bottom


def test_backward_check_marks_used_theory_axiom():
    # instance: unit edge, predicate asserted false; the theory lemma closes it
    f = CnfFormula(9, [(1,), (-9,)])
    proof = cert(
        theory_lemma((-1, 9), 9, (10,)),
        theory_lemma((-2, 9), 9, (11,)),  # irrelevant second lemma
        learned(()),
    )
    core = backward_check(f, proof)
    kinds = [r.kind for r in core.records]
    assert kinds == [RecordKind.THEORY, RecordKind.LEARNED]
    assert core.records[0].clause == (-1, 9)


def test_backward_core_mutation_breaks_verification():
    f = unsat_square()
    proof = cert(learned((1,)), learned((2,)), learned(()))
    core = backward_check(f, proof)
    assert check_drat(f, core).verified
    for drop in range(len(core.records)):
        mutated = ProofCertificate(
            [r for i, r in enumerate(core.records) if i != drop]
        )
        assert not check_drat(f, mutated).verified


def test_strip_theory_records():
    c = cert(theory_lemma((-1, 9), 9, (10,)), learned(()))
    plain = strip_theory_records(c)
    assert [r.kind for r in plain.records] == [RecordKind.LEARNED, RecordKind.LEARNED]
    assert plain.records[0].clause == (-1, 9)
    assert "t " not in write_certificate(plain)
