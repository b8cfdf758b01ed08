"""Literals, clauses, CNF formulas, assignments, unit propagation and RUP.

Literals are DIMACS-style nonzero signed integers: +v asserts variable v,
-v asserts its negation. Variable 0 is reserved/invalid. Clauses are tuples
of literals, normalized to drop duplicates while preserving first-occurrence
order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

Lit = int
Clause = tuple[Lit, ...]


def var_of(lit: Lit) -> int:
    """Variable of a literal."""
    return abs(lit)


def neg(lit: Lit) -> Lit:
    """Complement of a literal."""
    return -lit


def normalize_clause(lits: Iterable[Lit]) -> Clause:
    """Drop duplicate literals, preserving first-occurrence order."""
    seen = set()
    out = []
    for l in lits:
        if l == 0:
            raise ValueError("literal 0 is invalid")
        if l not in seen:
            seen.add(l)
            out.append(l)
    return tuple(out)


def is_tautology(clause: Sequence[Lit]) -> bool:
    """True when the clause contains some literal and its complement."""
    s = set(clause)
    return any(-l in s for l in s)


class Assignment:
    """Partial assignment: variable -> bool plus the trail of assigned literals."""

    __slots__ = ("values", "trail")

    def __init__(self, lits: Iterable[Lit] = ()):
        self.values: dict[int, bool] = {}
        self.trail: list[Lit] = []
        for l in lits:
            self.assign(l)

    def assign(self, lit: Lit) -> None:
        v = var_of(lit)
        want = lit > 0
        if v in self.values:
            if self.values[v] != want:
                raise ValueError(f"conflicting assignment to variable {v}")
            return
        self.values[v] = want
        self.trail.append(lit)

    def value_of(self, lit: Lit) -> bool | None:
        v = self.values.get(var_of(lit))
        if v is None:
            return None
        return v if lit > 0 else not v

    def is_assigned(self, var: int) -> bool:
        return var in self.values

    def copy(self) -> "Assignment":
        a = Assignment()
        a.values = dict(self.values)
        a.trail = list(self.trail)
        return a

    def literals(self) -> list[Lit]:
        return list(self.trail)

    def __len__(self) -> int:
        return len(self.trail)

    def __contains__(self, lit: Lit) -> bool:
        return self.value_of(lit) is True

    def __repr__(self) -> str:
        return f"Assignment({self.trail})"


class CnfFormula:
    """Indexed clause database with a deletion set."""

    def __init__(self, num_vars: int = 0, clauses: Iterable[Iterable[Lit]] = ()):
        self.num_vars = num_vars
        self.clauses: list[Clause] = []
        self.deleted: set[int] = set()
        for c in clauses:
            self.add_clause(c)

    def add_clause(self, lits: Iterable[Lit]) -> int:
        c = normalize_clause(lits)
        for l in c:
            if var_of(l) > self.num_vars:
                self.num_vars = var_of(l)
        self.clauses.append(c)
        return len(self.clauses) - 1

    def delete_clause(self, idx: int) -> None:
        if not 0 <= idx < len(self.clauses):
            raise IndexError(f"clause index {idx} out of range")
        self.deleted.add(idx)

    def live_clauses(self) -> Iterator[tuple[int, Clause]]:
        for i, c in enumerate(self.clauses):
            if i not in self.deleted:
                yield i, c

    def copy(self) -> "CnfFormula":
        f = CnfFormula(self.num_vars)
        f.clauses = list(self.clauses)
        f.deleted = set(self.deleted)
        return f

    def __len__(self) -> int:
        return len(self.clauses) - len(self.deleted)

    def __repr__(self) -> str:
        return f"CnfFormula(vars={self.num_vars}, clauses={len(self)})"


def reduce_clause(clause: Sequence[Lit], m: Assignment) -> Clause | None:
    """Reduce one clause: None if satisfied, else the clause minus falsified literals."""
    if is_tautology(clause):
        return None
    out = []
    for l in clause:
        v = m.value_of(l)
        if v is True:
            return None
        if v is None:
            out.append(l)
    return tuple(out)


def reduce_formula(f: CnfFormula, m: Assignment) -> CnfFormula:
    """Reduce a formula by an assignment.

    Satisfied clauses (and tautologies) are dropped, falsified literals are
    removed; a fully falsified clause is kept as the empty clause.
    """
    out = CnfFormula(f.num_vars)
    for _, c in f.live_clauses():
        r = reduce_clause(c, m)
        if r is not None:
            out.clauses.append(r)
    return out


def reduce_with_origin(
    clauses: Sequence[Clause], m: Assignment
) -> list[tuple[int, Clause]]:
    """Like reduce_formula over a clause list, keeping original indices."""
    out = []
    for i, c in enumerate(clauses):
        r = reduce_clause(c, m)
        if r is not None:
            out.append((i, r))
    return out


@dataclass
class PropagationResult:
    """Outcome of unit propagation: extended assignment, optional conflict."""

    assignment: Assignment
    conflict: int | None = None
    reasons: dict[int, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.conflict is None


def unit_propagate(f: CnfFormula, m: Assignment | Iterable[Lit] = ()) -> PropagationResult:
    """Run the unit clause rule to fixpoint.

    The scan restarts from clause 0 after every assignment, so units always
    fire from the earliest clause able to produce them and the result
    (including which clause is reported as the conflict) is deterministic for
    a given clause ordering. `reasons` maps each propagated variable to the
    clause index that forced it; assumption literals from `m` carry no reason.
    """
    cur = m.copy() if isinstance(m, Assignment) else Assignment(m)
    reasons: dict[int, int] = {}
    changed = True
    while changed:
        changed = False
        for i, c in f.live_clauses():
            unassigned: Lit | None = None
            n_unassigned = 0
            satisfied = False
            for l in c:
                v = cur.value_of(l)
                if v is True:
                    satisfied = True
                    break
                if v is None:
                    n_unassigned += 1
                    unassigned = l
                    if n_unassigned > 1:
                        break
            if satisfied:
                continue
            if n_unassigned == 0:
                return PropagationResult(cur, conflict=i, reasons=reasons)
            if n_unassigned == 1:
                cur.assign(unassigned)
                reasons[var_of(unassigned)] = i
                changed = True
                break  # rescan from the first clause
    return PropagationResult(cur, reasons=reasons)


def rup_check(f: CnfFormula, clause: Sequence[Lit]) -> bool:
    """Reverse unit propagation: does f plus the negation of `clause` conflict?"""
    try:
        m = Assignment(neg(l) for l in normalize_clause(clause))
    except ValueError:
        return True  # clause is tautological: its negation is already conflicting
    return not unit_propagate(f, m).ok


def rup_core(f: CnfFormula, clause: Sequence[Lit]) -> set[int] | None:
    """Clause indices participating in the RUP conflict for `clause`.

    Returns None when the RUP check fails. The core is the conflict clause
    plus the reasons of its literals, transitively (drat-trim style marking).
    """
    try:
        m = Assignment(neg(l) for l in normalize_clause(clause))
    except ValueError:
        return set()
    res = unit_propagate(f, m)
    if res.ok:
        return None
    core = {res.conflict}
    pending = [var_of(l) for l in f.clauses[res.conflict]]
    seen_vars: set[int] = set()
    while pending:
        v = pending.pop()
        if v in seen_vars:
            continue
        seen_vars.add(v)
        r = res.reasons.get(v)
        if r is None:
            continue
        core.add(r)
        pending.extend(var_of(l) for l in f.clauses[r])
    return core


def _effective_sign(lit: Lit, flip_vars: frozenset[int] | set[int]) -> int:
    s = 1 if lit > 0 else -1
    return -s if var_of(lit) in flip_vars else s


def is_horn(f: CnfFormula, flip_vars: Iterable[int] = ()) -> bool:
    """At most one positive literal per clause, optionally flipping some variables' signs."""
    flips = frozenset(flip_vars)
    for _, c in f.live_clauses():
        if sum(1 for l in c if _effective_sign(l, flips) > 0) > 1:
            return False
    return True


def is_dual_horn(f: CnfFormula, flip_vars: Iterable[int] = ()) -> bool:
    """At most one negative literal per clause, optionally flipping some variables' signs."""
    flips = frozenset(flip_vars)
    for _, c in f.live_clauses():
        if sum(1 for l in c if _effective_sign(l, flips) < 0) > 1:
            return False
    return True


def encode_implication(
    antecedent: Sequence[Clause], head: Lit, fresh_var_base: int
) -> tuple[list[Clause], int]:
    """CNF-encode (antecedent => head) with one selector per antecedent clause.

    For each clause C_i a fresh selector l_i (numbered fresh_var_base+1, ...)
    gets clauses (¬c ∨ ¬l_i) for every literal c of C_i, plus the single
    clause (l_1 ∨ ... ∨ l_n ∨ head). Tautological antecedent clauses are
    skipped (they cannot be falsified). Returns (clauses, number of selectors
    used).
    """
    hv = var_of(head)
    out: list[Clause] = []
    selectors: list[Lit] = []
    nxt = fresh_var_base
    for c in antecedent:
        if any(var_of(l) == hv for l in c):
            raise ValueError("antecedent mentions the head variable")
        if is_tautology(c):
            continue
        nxt += 1
        sel = nxt
        selectors.append(sel)
        for l in c:
            out.append((neg(l), -sel))
    out.append(tuple(selectors) + (head,))
    return out, nxt - fresh_var_base


def write_dimacs(f: CnfFormula) -> str:
    """Serialize to DIMACS CNF text (deleted clauses are skipped)."""
    lines = [f"p cnf {f.num_vars} {len(f)}"]
    for _, c in f.live_clauses():
        lines.append(" ".join(str(l) for l in c) + " 0")
    return "\n".join(lines) + "\n"


def read_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF text; raises ValueError with a line number on bad input."""
    f: CnfFormula | None = None
    declared = 0
    pending: list[Lit] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {ln}: malformed problem line")
            f = CnfFormula(int(parts[2]))
            declared = int(parts[3])
            continue
        if f is None:
            raise ValueError(f"line {ln}: clause before problem line")
        try:
            toks = [int(t) for t in line.split()]
        except ValueError:
            raise ValueError(f"line {ln}: non-integer token") from None
        for t in toks:
            if t == 0:
                f.add_clause(pending)
                pending = []
            else:
                pending.append(t)
    if f is None:
        raise ValueError("missing problem line")
    if pending:
        raise ValueError("unterminated final clause")
    if len(f.clauses) != declared:
        raise ValueError(
            f"header declares {declared} clauses, found {len(f.clauses)}"
        )
    return f
