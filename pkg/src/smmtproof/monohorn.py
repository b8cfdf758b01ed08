"""Monotonic definitions, the MonoT transform, and instantiation-based
Horn upper-bounds for discharging theory lemmas by unit propagation.

A definition here is one-sided: it characterizes one polarity of a predicate
atom over its monotone inputs. Definitions whose clause set is Horn (after
flipping negatively-monotonic inputs) discharge same-polarity lemmas
directly; the opposite polarity is discharged by reducing the definition
under a witness assignment to its auxiliary variables and re-encoding the
residual as an implication.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .cnf import (
    Assignment,
    Clause,
    CnfFormula,
    encode_implication,
    is_dual_horn,
    is_horn,
    neg,
    reduce_with_origin,
    rup_check,
    unit_propagate,
    var_of,
)

if TYPE_CHECKING:
    from .kernel import TheoryLemma


class ConditionOneViolated(ValueError):
    """The witness is inconsistent with the definition and the lemma."""


class NonHornResidual(ValueError):
    """The witness is too partial: the residual is not input-only-negative."""


class DischargeError(ValueError):
    """A core lemma failed verification against the combined definition."""

    def __init__(self, index: int, message: str):
        super().__init__(f"lemma {index}: {message}")
        self.index = index


@dataclass
class MonotonicDefinition:
    """One-sided CNF definition of a predicate atom.

    `inputs` maps each input variable to its monotone polarity with respect
    to the defined atom (+1 when raising the input can only help the atom,
    -1 when it can only hurt it). Everything else in the clauses, apart from
    the head variable, is auxiliary.
    """

    clauses: list[Clause]
    head_var: int
    head_sign: int
    inputs: dict[int, int]
    name: str = ""

    @property
    def head_lit(self) -> int:
        return self.head_sign * self.head_var

    def aux_vars(self) -> set[int]:
        out = set()
        for c in self.clauses:
            for l in c:
                v = var_of(l)
                if v != self.head_var and v not in self.inputs:
                    out.add(v)
        return out

    def all_vars(self) -> set[int]:
        return {var_of(l) for c in self.clauses for l in c}

    def flip_set(self) -> frozenset[int]:
        """Variables whose sign is flipped by the monotone rewrite."""
        flips = {v for v, pol in self.inputs.items() if pol < 0}
        if self.head_sign < 0:
            flips.add(self.head_var)
        return frozenset(flips)

    def is_horn_rewritten(self) -> bool:
        return is_horn(CnfFormula(0, self.clauses), self.flip_set())

    def lint(self) -> list[str]:
        """Check the monotonic-definition syntax restrictions; return violations."""
        problems = []
        if self.head_var in self.inputs:
            problems.append("head variable listed as input")
        input_flips = {v for v, pol in self.inputs.items() if pol < 0}
        for ci, c in enumerate(self.clauses):
            for l in c:
                v = var_of(l)
                if v in self.inputs and l == self.inputs[v] * v:
                    problems.append(
                        f"clause {ci}: monotone-positive input occurrence {l}"
                    )
            if -self.head_lit in c:
                problems.append(f"clause {ci}: complement head literal")
            if self.head_lit in c:
                pos = sum(
                    1
                    for l in c
                    if var_of(l) != self.head_var
                    and (l > 0) != (var_of(l) in input_flips)
                )
                if pos + (1 if self.head_lit > 0 else 0) > 1:
                    problems.append(f"clause {ci}: head in non-Horn clause")
        return problems

    def check(self) -> "MonotonicDefinition":
        problems = self.lint()
        if problems:
            raise ValueError("; ".join(problems))
        return self


@dataclass
class HornUpperBound:
    """Horn (or dual-Horn) clause set implied by a monotonic definition."""

    clauses: list[Clause]
    lemma: "TheoryLemma"
    witness_used: tuple[int, ...]
    fresh_var_base: int
    num_fresh: int
    input_flips: frozenset[int] = field(default_factory=frozenset)

    def as_formula(self) -> CnfFormula:
        return CnfFormula(0, self.clauses)

    def is_horn_or_dual_horn(self) -> bool:
        f = self.as_formula()
        return is_horn(f, self.input_flips) or is_dual_horn(f, self.input_flips)


def mono_transform(
    definition: CnfFormula | Sequence[Clause],
    head_var: int,
    inputs: Mapping[int, int] | Iterable[int],
    fresh_var_base: int,
    head_sign: int = 1,
    name: str = "",
) -> MonotonicDefinition:
    """Rename inputs and head apart and re-link them with implications.

    Every occurrence of an input atom a becomes a fresh a', the head p
    becomes p', and the clauses a => a' (in the monotone direction) and
    p' => p are added. The output has exactly n + |A| + 1 clauses and
    satisfies the monotonic-definition syntax restrictions.
    """
    clauses = (
        [c for _, c in definition.live_clauses()]
        if isinstance(definition, CnfFormula)
        else list(definition)
    )
    pol = dict(inputs) if isinstance(inputs, Mapping) else {v: 1 for v in inputs}
    used = {var_of(l) for c in clauses for l in c}
    used |= set(pol) | {head_var}
    if fresh_var_base < max(used, default=0):
        raise ValueError("fresh-variable collision with definition variables")

    rename: dict[int, int] = {}
    nxt = fresh_var_base
    for v in sorted(pol):
        nxt += 1
        rename[v] = nxt
    nxt += 1
    head_prime = nxt
    rename[head_var] = head_prime

    renamed = [
        tuple((1 if l > 0 else -1) * rename.get(var_of(l), var_of(l)) for l in c)
        for c in clauses
    ]
    for v in sorted(pol):
        s = pol[v]
        renamed.append((-s * v, s * rename[v]))
    hs = head_sign
    renamed.append((-hs * head_prime, hs * head_var))
    return MonotonicDefinition(
        clauses=renamed,
        head_var=head_var,
        head_sign=head_sign,
        inputs=dict(pol),
        name=name or f"monot({head_var})",
    ).check()


def lemma_specific_horn(
    defn: MonotonicDefinition,
    lemma: "TheoryLemma",
    fresh_var_base: int,
) -> HornUpperBound:
    """Build the lemma-specific Horn upper-bound from a witness.

    The definition's clauses are reduced under the lemma head (the complement
    of the definition's own head) together with the witness; the residual,
    which must mention only monotone-negated input literals, is re-encoded
    as (residual => lemma head) with fresh selector variables.
    """
    if lemma.predicate_var != defn.head_var or lemma.head_sign == defn.head_sign:
        raise ValueError("lemma must conclude the complement of the defined atom")
    aux = defn.aux_vars()
    for w in lemma.witness:
        if var_of(w) not in aux:
            raise ValueError(f"witness literal {w} is not over an auxiliary variable")
    try:
        m0 = Assignment([lemma.head_lit, *lemma.witness])
    except ValueError as exc:
        raise ConditionOneViolated(f"witness self-contradictory: {exc}") from exc

    residual = reduce_with_origin(defn.clauses, m0)
    if any(not rc for _, rc in residual):
        raise ConditionOneViolated("witness falsifies a definition clause")

    # Theorem 3 condition (1), checked cheaply: the reduction must survive
    # the lemma's own antecedent without conflict under unit propagation.
    m_a = [neg(l) for l in lemma.clause if var_of(l) != lemma.predicate_var]
    rf = CnfFormula(0, (rc for _, rc in residual))
    try:
        probe = Assignment(m_a)
    except ValueError as exc:
        raise ConditionOneViolated(f"lemma antecedent contradictory: {exc}") from exc
    if not unit_propagate(rf, probe).ok:
        raise ConditionOneViolated("reduction conflicts with the lemma antecedent")

    for _, rc in residual:
        for l in rc:
            v = var_of(l)
            if v not in defn.inputs or l != -defn.inputs[v] * v:
                raise NonHornResidual(
                    f"residual literal {l} is not a monotone-negated input"
                )

    bound_clauses, used = encode_implication(
        [rc for _, rc in residual], lemma.head_lit, fresh_var_base
    )
    return HornUpperBound(
        clauses=bound_clauses,
        lemma=lemma,
        witness_used=tuple(lemma.witness),
        fresh_var_base=fresh_var_base,
        num_fresh=used,
        input_flips=frozenset(v for v, p in defn.inputs.items() if p < 0),
    )


def verify_lemma(bound: HornUpperBound | CnfFormula, lemma: "TheoryLemma") -> bool:
    """RUP-check the lemma clause against a bound (or any clause database)."""
    f = bound.as_formula() if isinstance(bound, HornUpperBound) else bound
    return rup_check(f, lemma.clause)


@dataclass
class LemmaReport:
    index: int
    predicate_var: int
    head_sign: int
    route: str  # "direct-horn" or "instantiation"
    fresh_used: int
    verified: bool


def proof_specific_definition(
    defs: Mapping[int, Mapping[int, MonotonicDefinition]],
    core_lemmas: Sequence["TheoryLemma"],
    fresh_var_base: int,
) -> tuple[CnfFormula, list[LemmaReport]]:
    """Combine per-lemma Horn bounds and shared Horn definitions.

    `defs` maps predicate variable -> head sign -> definition. Each lemma is
    discharged either directly from a Horn definition of its own polarity or
    by instantiating the opposite definition with the lemma's witness. Every
    lemma must RUP-verify against the union; the first failure aborts.
    """
    combined = CnfFormula(fresh_var_base)
    reports: list[LemmaReport] = []
    shared_added: set[tuple[int, int]] = set()
    nxt = fresh_var_base
    for i, lemma in enumerate(core_lemmas):
        sides = defs.get(lemma.predicate_var)
        if not sides:
            raise DischargeError(i, "no definition for predicate")
        direct = sides.get(lemma.head_sign)
        if direct is not None and direct.is_horn_rewritten():
            key = (lemma.predicate_var, lemma.head_sign)
            if key not in shared_added:
                shared_added.add(key)
                for c in direct.clauses:
                    combined.add_clause(c)
            reports.append(
                LemmaReport(i, lemma.predicate_var, lemma.head_sign, "direct-horn", 0, False)
            )
            continue
        opposite = sides.get(-lemma.head_sign)
        if opposite is None:
            raise DischargeError(i, "no definition usable for this polarity")
        try:
            bound = lemma_specific_horn(opposite, lemma, nxt)
        except (ConditionOneViolated, NonHornResidual) as exc:
            raise DischargeError(i, str(exc)) from exc
        nxt += bound.num_fresh
        for c in bound.clauses:
            combined.add_clause(c)
        reports.append(
            LemmaReport(
                i, lemma.predicate_var, lemma.head_sign, "instantiation", bound.num_fresh, False
            )
        )
    for i, lemma in enumerate(core_lemmas):
        if not rup_check(combined, lemma.clause):
            raise DischargeError(i, "lemma not derivable from combined definition")
        reports[i].verified = True
    return combined, reports
