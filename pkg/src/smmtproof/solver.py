"""CDCL engine with first-UIP learning, proof logging, and theory hooks.

The propositional core is a conventional watched-literal CDCL loop; the
theory layer is consulted at every propagation fixpoint. Theory reasons stay
symbolic handles until conflict analysis actually needs them, at which point
the explanation clause joins the database and, when logging, the certificate
as a theory-lemma record.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .cnf import CnfFormula, is_tautology, rup_check
from .drat import ProofCertificate, learned as learned_rec, theory_lemma
from .kernel import LemmaHandle, SmmtKernel, TheoryLemma


class Status(Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


@dataclass
class SolveResult:
    status: Status
    model: dict[int, bool] | None = None
    certificate: ProofCertificate | None = None
    conflicts: int = 0
    decisions: int = 0
    propagations: int = 0
    theory_lemma_count: int = 0

    @property
    def ok(self) -> bool:
        return self.status is not Status.UNKNOWN


def _luby(i: int) -> int:
    k = i.bit_length()
    if i == (1 << k) - 1:
        return 1 << (k - 1)
    return _luby(i - (1 << (k - 1)) + 1)


RESTART_UNIT = 64
ACTIVITY_DECAY = 0.95
RESCALE = 1e100


class Solver:
    """Single-use CDCL solver instance."""

    def __init__(
        self,
        formula: CnfFormula,
        theory: SmmtKernel | None = None,
        log_proof: bool = False,
        seed: int = 0,
        max_conflicts: int | None = None,
        debug_check_learned: bool = False,
    ):
        self.num_vars = formula.num_vars
        if theory is not None:
            self.num_vars = max([self.num_vars, *theory.variables()], default=self.num_vars)
        self.theory = theory
        self.log_proof = log_proof
        self.max_conflicts = max_conflicts
        self.debug_check_learned = debug_check_learned
        self.proof = ProofCertificate()

        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.values: dict[int, bool] = {}
        self.level: dict[int, int] = {}
        self.reason: dict[int, int | LemmaHandle | None] = {}
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.phase: dict[int, bool] = {}
        self.activity: dict[int, float] = {v: 0.0 for v in range(1, self.num_vars + 1)}
        self.var_inc = 1.0
        self.root_units: list[tuple[int, int]] = []  # (literal, clause index)
        self.root_conflict = False
        self._materialized: dict[LemmaHandle, int] = {}
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0
        self.theory_lemma_count = 0
        del seed  # decisions are deterministic; parameter kept for interface stability

        for _, c in formula.live_clauses():
            if is_tautology(c):
                continue
            if not c:
                self.root_conflict = True
                continue
            self._add_clause(list(c))

    # -- clause database -----------------------------------------------------

    def _add_clause(self, lits: list[int]) -> int:
        """Add a clause, watching two unassigned-or-latest literals."""
        for v in map(abs, lits):
            if v > self.num_vars:
                self.num_vars = v
            self.activity.setdefault(v, 0.0)
        idx = len(self.clauses)
        if len(lits) == 1:
            self.clauses.append(lits)
            self.root_units.append((lits[0], idx))
            return idx

        def rank(l: int) -> tuple[int, int]:
            if abs(l) not in self.values:
                return (2, 0)
            return (1, self.level[abs(l)])

        c = sorted(lits, key=rank, reverse=True)
        self.clauses.append(c)
        self.watches.setdefault(c[0], []).append(idx)
        self.watches.setdefault(c[1], []).append(idx)
        return idx

    # -- assignment ------------------------------------------------------------

    def value_of(self, lit: int) -> bool | None:
        v = self.values.get(abs(lit))
        if v is None:
            return None
        return v if lit > 0 else not v

    @property
    def current_level(self) -> int:
        return len(self.trail_lim)

    def _assign(self, lit: int, reason) -> None:
        v = abs(lit)
        self.values[v] = lit > 0
        self.level[v] = self.current_level
        self.reason[v] = reason
        self.trail.append(lit)

    def _backjump(self, target: int) -> None:
        if target >= self.current_level:
            return
        keep = self.trail_lim[target]
        while len(self.trail) > keep:
            lit = self.trail.pop()
            v = abs(lit)
            self.phase[v] = self.values[v]
            del self.values[v]
            del self.level[v]
            del self.reason[v]
        del self.trail_lim[target:]
        self.qhead = min(self.qhead, len(self.trail))

    # -- propagation -----------------------------------------------------------

    def _assert_root_units(self) -> int | None:
        for lit, idx in self.root_units:
            val = self.value_of(lit)
            if val is True:
                continue
            if val is False:
                return idx
            self._assign(lit, idx)
        return None

    def _propagate(self) -> int | None:
        """Watched-literal unit propagation; returns a conflict clause index."""
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            self.propagations += 1
            false_lit = -lit
            ws = self.watches.get(false_lit)
            if not ws:
                continue
            i = 0
            while i < len(ws):
                ci = ws[i]
                c = self.clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                if self.value_of(c[0]) is True:
                    i += 1
                    continue
                moved = False
                for j in range(2, len(c)):
                    if self.value_of(c[j]) is not False:
                        c[1], c[j] = c[j], c[1]
                        self.watches.setdefault(c[1], []).append(ci)
                        ws[i] = ws[-1]
                        ws.pop()
                        moved = True
                        break
                if moved:
                    continue
                if self.value_of(c[0]) is False:
                    return ci
                self._assign(c[0], ci)
                i += 1
        return None

    def _materialize(self, handle: LemmaHandle) -> int:
        """Turn a theory reason into a database clause (and proof record)."""
        if handle in self._materialized:
            return self._materialized[handle]
        lemma: TheoryLemma = self.theory.explain(handle)
        idx = self._add_clause(list(lemma.clause))
        self._materialized[handle] = idx
        self.theory_lemma_count += 1
        if self.log_proof:
            self.proof.append(
                theory_lemma(lemma.clause, lemma.predicate_var, lemma.witness)
            )
        return idx

    def _theory_propagate(self) -> int | None:
        """Propositional and theory propagation to a joint fixpoint."""
        while True:
            confl = self._assert_root_units()
            if confl is None:
                confl = self._propagate()
            if confl is not None or self.theory is None:
                return confl
            resp = self.theory.propagate(self.values)
            if resp.conflict is not None:
                return self._materialize(resp.conflict)
            progressed = False
            for lit, handle in resp.implied:
                val = self.value_of(lit)
                if val is True:
                    continue
                if val is False:
                    return self._materialize(handle)
                self._assign(lit, handle)
                progressed = True
            if not progressed:
                return None

    # -- conflict analysis -------------------------------------------------------

    def _bump(self, v: int) -> None:
        self.activity[v] = self.activity.get(v, 0.0) + self.var_inc
        if self.activity[v] > RESCALE:
            for u in self.activity:
                self.activity[u] /= RESCALE
            self.var_inc /= RESCALE

    def _reason_clause_idx(self, v: int) -> int:
        r = self.reason[v]
        if isinstance(r, LemmaHandle):
            r = self._materialize(r)
            self.reason[v] = r
        return r

    def _analyze(self, confl_idx: int) -> tuple[list[int], int]:
        """First-UIP learned clause (asserting literal first) and backjump level."""
        seen: set[int] = set()
        tail: list[int] = []
        counter = 0
        p: int | None = None
        idx = len(self.trail)
        cur = confl_idx
        while True:
            for lit in self.clauses[cur]:
                if p is not None and lit == p:
                    continue
                v = abs(lit)
                if v in seen or self.level.get(v, 0) == 0:
                    continue
                seen.add(v)
                self._bump(v)
                if self.level[v] == self.current_level:
                    counter += 1
                else:
                    tail.append(lit)
            while True:
                idx -= 1
                if abs(self.trail[idx]) in seen:
                    break
            p = self.trail[idx]
            seen.discard(abs(p))
            counter -= 1
            if counter == 0:
                break
            cur = self._reason_clause_idx(abs(p))
        learned = [-p] + tail
        back = max((self.level[abs(l)] for l in tail), default=0)
        return learned, back

    def _learn(self, lits: list[int], back: int) -> None:
        self._backjump(back)
        self.var_inc /= ACTIVITY_DECAY
        idx = self._add_clause(list(lits))
        if self.value_of(lits[0]) is None:
            self._assign(lits[0], idx)
        if self.log_proof:
            self.proof.append(learned_rec(lits))
        if self.debug_check_learned:
            db = CnfFormula(self.num_vars, self.clauses[:idx])
            assert rup_check(db, tuple(lits)), "learned clause is not RUP"

    def _finalize_unsat(self, confl_idx: int) -> None:
        """Materialize theory reasons feeding the root conflict, then log bottom."""
        stack = [abs(l) for l in self.clauses[confl_idx]]
        visited: set[int] = set()
        while stack:
            v = stack.pop()
            if v in visited:
                continue
            visited.add(v)
            r = self.reason.get(v)
            if isinstance(r, LemmaHandle):
                r = self._materialize(r)
                self.reason[v] = r
            if isinstance(r, int):
                stack.extend(abs(l) for l in self.clauses[r])
        if self.log_proof:
            self.proof.append(learned_rec([]))

    # -- main loop -------------------------------------------------------------

    def _decide(self) -> bool:
        best_v = None
        best_a = -1.0
        for v in range(1, self.num_vars + 1):
            if v in self.values:
                continue
            a = self.activity.get(v, 0.0)
            if a > best_a:
                best_a = a
                best_v = v
        if best_v is None:
            return False
        self.decisions += 1
        self.trail_lim.append(len(self.trail))
        self._assign(best_v if self.phase.get(best_v, False) else -best_v, None)
        return True

    def solve(self) -> SolveResult:
        if self.theory is not None:
            self.theory.reset()
        if self.root_conflict:
            if self.log_proof:
                self.proof.append(learned_rec([]))
            return self._result(Status.UNSAT)
        restarts = 1
        budget = _luby(restarts) * RESTART_UNIT
        since_restart = 0
        while True:
            confl = self._theory_propagate()
            if confl is None and not self._decide():
                bad = self.theory.final_check(self.values) if self.theory else None
                if bad is None:
                    return self._result(Status.SAT, dict(self.values))
                confl = self._materialize(bad)
            if confl is not None:
                self.conflicts += 1
                since_restart += 1
                if self.current_level == 0:
                    self._finalize_unsat(confl)
                    return self._result(Status.UNSAT)
                lits, back = self._analyze(confl)
                self._learn(lits, back)
                if self.max_conflicts is not None and self.conflicts >= self.max_conflicts:
                    return self._result(Status.UNKNOWN)
                if since_restart >= budget:
                    restarts += 1
                    budget = _luby(restarts) * RESTART_UNIT
                    since_restart = 0
                    self._backjump(0)
            # otherwise a decision was made; propagate again

    def _result(self, status: Status, model=None) -> SolveResult:
        return SolveResult(
            status=status,
            model=model,
            certificate=self.proof if self.log_proof else None,
            conflicts=self.conflicts,
            decisions=self.decisions,
            propagations=self.propagations,
            theory_lemma_count=self.theory_lemma_count,
        )


def solve(
    formula: CnfFormula,
    theory: SmmtKernel | None = None,
    log_proof: bool = False,
    seed: int = 0,
    max_conflicts: int | None = None,
    debug_check_learned: bool = False,
) -> SolveResult:
    """One-shot CDCL solve."""
    return Solver(
        formula,
        theory=theory,
        log_proof=log_proof,
        seed=seed,
        max_conflicts=max_conflicts,
        debug_check_learned=debug_check_learned,
    ).solve()
