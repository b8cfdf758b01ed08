"""Extended-DRAT certificates, the forward RUP checker, and the
backward-traversal trimmer.

The text format is standard DRAT (signed decimals, 0 terminators, `d` for
deletions) extended with theory-lemma records
`t <pred-var> <clause lits> 0 <witness lits> 0`. Stripping the `t` records
after discharge leaves a file any plain DRAT checker can consume.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable

from .cnf import Clause, CnfFormula, normalize_clause, rup_check, rup_core, var_of


class RecordKind(enum.Enum):
    LEARNED = "learned"
    DELETE = "delete"
    THEORY = "theory"


@dataclass(frozen=True)
class ProofRecord:
    kind: RecordKind
    clause: Clause
    witness: tuple[int, ...] | None = None
    predicate_var: int | None = None

    def __post_init__(self):
        if (self.kind is RecordKind.THEORY) != (self.witness is not None):
            raise ValueError("witness present iff the record is a theory lemma")
        if self.kind is RecordKind.THEORY:
            if self.predicate_var is None:
                raise ValueError("theory record needs its predicate variable")
            heads = [l for l in self.clause if var_of(l) == self.predicate_var]
            if len(heads) != 1:
                raise ValueError("theory clause must mention its predicate once")


def learned(clause: Iterable[int]) -> ProofRecord:
    return ProofRecord(RecordKind.LEARNED, normalize_clause(clause))


def deletion(clause: Iterable[int]) -> ProofRecord:
    return ProofRecord(RecordKind.DELETE, normalize_clause(clause))


def theory_lemma(
    clause: Iterable[int], predicate_var: int, witness: Iterable[int]
) -> ProofRecord:
    return ProofRecord(
        RecordKind.THEORY, normalize_clause(clause), tuple(witness), predicate_var
    )


@dataclass
class ProofCertificate:
    records: list[ProofRecord] = field(default_factory=list)

    def append(self, record: ProofRecord) -> None:
        self.records.append(record)

    def theory_records(self) -> list[ProofRecord]:
        return [r for r in self.records if r.kind is RecordKind.THEORY]

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


class Reason(enum.Enum):
    RUP_FAILED = "RupFailed"
    EMPTY_CLAUSE_NOT_DERIVED = "EmptyClauseNotDerived"
    BAD_DELETION = "BadDeletion"


@dataclass(frozen=True)
class Verdict:
    verified: bool
    failed_index: int | None = None
    reason: Reason | None = None

    def __bool__(self) -> bool:
        return self.verified


VERIFIED = Verdict(True)


def check_drat(f: CnfFormula, proof: ProofCertificate) -> Verdict:
    """Forward RUP check of a plain-DRAT certificate.

    Every learned clause must be RUP against the current database (original
    plus prior learned minus deleted); deletions must reference live clauses.
    Verified exactly when an empty clause is derived. Theory records must
    have been discharged beforehand.
    """
    for r in proof:
        if r.kind is RecordKind.THEORY:
            raise ValueError("certificate still contains theory records")
    db = f.copy()
    for i, rec in enumerate(proof):
        if rec.kind is RecordKind.DELETE:
            target = frozenset(rec.clause)
            for ci, c in db.live_clauses():
                if frozenset(c) == target:
                    db.delete_clause(ci)
                    break
            else:
                return Verdict(False, i, Reason.BAD_DELETION)
            continue
        if not rup_check(db, rec.clause):
            return Verdict(False, i, Reason.RUP_FAILED)
        db.add_clause(rec.clause)
        if not rec.clause:
            return VERIFIED
    return Verdict(False, len(proof.records), Reason.EMPTY_CLAUSE_NOT_DERIVED)


def backward_check(f: CnfFormula, proof: ProofCertificate) -> ProofCertificate:
    """Trim a certificate to the records needed to derive the final bottom.

    Theory records are treated as axioms during the forward pass and marked
    needed when their clause participates in a needed conflict; they are
    never expanded. Deletion records are dropped (the solver emits none and
    keeping extra clauses preserves RUP). The result preserves record order
    and still forward-verifies.
    """
    db = f.copy()
    n_original = len(f.clauses)
    origin: dict[int, int] = {}
    cores: list[set[int] | None] = []
    empty_at: int | None = None
    for i, rec in enumerate(proof):
        if rec.kind is RecordKind.DELETE:
            target = frozenset(rec.clause)
            for ci, c in db.live_clauses():
                if frozenset(c) == target:
                    db.delete_clause(ci)
                    break
            else:
                raise ValueError(f"record {i}: deletion of absent clause")
            cores.append(None)
            continue
        if rec.kind is RecordKind.LEARNED:
            core = rup_core(db, rec.clause)
            if core is None:
                raise ValueError(f"record {i}: clause is not RUP, proof invalid")
            cores.append(core)
        else:
            cores.append(None)  # axiom
        idx = db.add_clause(rec.clause)
        origin[idx] = i
        if rec.kind is RecordKind.LEARNED and not rec.clause and empty_at is None:
            empty_at = i
            break
    if empty_at is None:
        raise ValueError("proof does not derive the empty clause")

    needed = {empty_at}
    for i in range(empty_at, -1, -1):
        if i not in needed or cores[i] is None:
            continue
        for db_idx in cores[i]:
            if db_idx >= n_original:
                needed.add(origin[db_idx])
    kept = [
        rec
        for i, rec in enumerate(proof)
        if i in needed and rec.kind is not RecordKind.DELETE
    ]
    return ProofCertificate(kept)


def strip_theory_records(proof: ProofCertificate) -> ProofCertificate:
    """Downgrade discharged theory lemmas to plain learned clauses, in place order."""
    out = []
    for rec in proof:
        if rec.kind is RecordKind.THEORY:
            out.append(ProofRecord(RecordKind.LEARNED, rec.clause))
        else:
            out.append(rec)
    return ProofCertificate(out)


def write_certificate(proof: ProofCertificate) -> str:
    lines = []
    for rec in proof:
        body = " ".join(str(l) for l in rec.clause)
        if rec.kind is RecordKind.LEARNED:
            lines.append(f"{body} 0".lstrip())
        elif rec.kind is RecordKind.DELETE:
            lines.append(f"d {body} 0".replace("  ", " "))
        else:
            wit = " ".join(str(l) for l in rec.witness)
            line = f"t {rec.predicate_var} {body} 0 {wit} 0"
            lines.append(" ".join(line.split()))
    return "\n".join(lines) + ("\n" if lines else "")


def read_certificate(text: str) -> ProofCertificate:
    proof = ProofCertificate()
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        toks = line.split()
        try:
            if toks[0] == "d":
                nums = [int(t) for t in toks[1:]]
                if not nums or nums[-1] != 0 or 0 in nums[:-1]:
                    raise ValueError("malformed deletion")
                proof.append(deletion(nums[:-1]))
            elif toks[0] == "t":
                nums = [int(t) for t in toks[1:]]
                pred = nums[0]
                rest = nums[1:]
                z1 = rest.index(0)
                clause, tail = rest[:z1], rest[z1 + 1 :]
                if not tail or tail[-1] != 0 or 0 in tail[:-1]:
                    raise ValueError("malformed witness section")
                proof.append(theory_lemma(clause, pred, tail[:-1]))
            else:
                nums = [int(t) for t in toks]
                if not nums or nums[-1] != 0 or 0 in nums[:-1]:
                    raise ValueError("missing terminator")
                proof.append(learned(nums[:-1]))
        except (ValueError, IndexError) as exc:
            raise ValueError(f"line {ln}: {exc}") from None
    return proof
