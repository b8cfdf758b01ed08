"""Shared brute-force oracles and the running-example fixture data.

Everything here is deliberately independent of the library's propagation
machinery: satisfiability and implication are decided by exhaustive model
enumeration so they can serve as oracles for the real implementations.
"""

from __future__ import annotations

from itertools import product

from smmtproof.cnf import Assignment, Clause, CnfFormula


def all_assignments(num_vars: int):
    """Yield every total assignment as a dict var -> bool."""
    for bits in product((False, True), repeat=num_vars):
        yield {v: bits[v - 1] for v in range(1, num_vars + 1)}


def clause_satisfied(clause, model: dict[int, bool]) -> bool:
    return any(model[abs(l)] == (l > 0) for l in clause)


def formula_satisfied(f: CnfFormula, model: dict[int, bool]) -> bool:
    return all(clause_satisfied(c, model) for _, c in f.live_clauses())


def brute_force_satisfiable(f: CnfFormula) -> bool:
    return any(formula_satisfied(f, m) for m in all_assignments(f.num_vars))


def brute_force_implies(f: CnfFormula, clause) -> bool:
    """f |= clause via model enumeration (clause vars must be <= f.num_vars)."""
    nv = max([f.num_vars] + [abs(l) for l in clause])
    for m in all_assignments(nv):
        if all(clause_satisfied(c, m) for _, c in f.live_clauses()):
            if not clause_satisfied(clause, m):
                return False
    return True


def with_units(f: CnfFormula, lits) -> CnfFormula:
    g = f.copy()
    for l in lits:
        g.add_clause([l])
    return g


# Running-example graph (Fig. 2): edge variables a..h = 1..8, predicate
# atom reach = 9, per-vertex reachability atoms s,v1..v4,t = 10..15.
A, B, C, D, E, F_, G, H = range(1, 9)
REACH = 9
R_S, R_V1, R_V2, R_V3, R_V4, R_T = range(10, 16)

FIG2_NODES = 6  # s=0, v1=1, v2=2, v3=3, v4=4, t=5
FIG2_EDGES = [
    (0, 1, A),  # a: s  -> v1
    (0, 2, B),  # b: s  -> v2
    (1, 3, C),  # c: v1 -> v3
    (2, 4, D),  # d: v2 -> v4
    (3, 2, E),  # e: v3 -> v2
    (4, 3, F_),  # f: v4 -> v3
    (4, 5, G),  # g: v4 -> t
    (3, 5, H),  # h: v3 -> t
]

# The ten clauses of the running example, in the paper's numbering.
EXAMPLE1_CLAUSES: list[Clause] = [
    (-R_S, -A, R_V1),
    (-R_V1, -C, R_V3),
    (-R_V3, -H, R_T),
    (-R_S, -B, R_V2),
    (-R_V3, -E, R_V2),
    (-R_V2, -D, R_V4),
    (-R_V4, -F_, R_V3),
    (-R_V4, -G, R_T),
    (-R_T, REACH),
    (R_S,),
]


def example1_formula() -> CnfFormula:
    return CnfFormula(15, EXAMPLE1_CLAUSES)


def example4_witness() -> Assignment:
    """Vertex statuses {s, v1, v2, ¬v3, ¬v4, ¬t} over the reach atoms."""
    return Assignment([R_S, R_V1, R_V2, -R_V3, -R_V4, -R_T])


def backtrack_satisfiable(clauses, units=()) -> bool:
    """Clause-driven backtracking SAT oracle, independent of unit propagation."""
    cl = [tuple(c) for c in clauses] + [(l,) for l in units]

    def go(assign):
        for c in cl:
            vals = [assign.get(abs(l)) for l in c]
            if any(v is not None and v == (l > 0) for l, v in zip(c, vals)):
                continue
            free = [l for l, v in zip(c, vals) if v is None]
            if not free:
                return False
            lit = free[0]
            for choice in (lit > 0, lit < 0):
                assign[abs(lit)] = choice
                if go(assign):
                    return True
                del assign[abs(lit)]
            return False
        return True

    return go({})


def backtrack_implies(clauses, units, lit) -> bool:
    """clauses ∧ units |= lit, via the backtracking oracle."""
    return not backtrack_satisfiable(clauses, list(units) + [-lit])


def lemma_valid_bruteforce(eval_fn, input_vars, m_a_lits, head_sign) -> bool:
    """Oracle: does M_A => (sign)predicate hold under every input completion?"""
    fixed = {abs(l): l > 0 for l in m_a_lits}
    free = [v for v in input_vars if v not in fixed]
    for bits in product((False, True), repeat=len(free)):
        model = dict(fixed)
        model.update(zip(free, bits))
        if eval_fn(model) != (head_sign > 0):
            return False
    return True
