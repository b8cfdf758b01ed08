"""SMMT layer: predicate bindings, monotone approximations, theory
propagation over them, and witness-strengthened theory lemmas.

The kernel is generic: each binding carries a theory backend object that can
evaluate its predicate on a total input assignment and render strengthened
lemma antecedents plus witnesses. Backends for the concrete theories live in
graphs.py, bitvec.py and maxflow.py.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Protocol, Sequence

from .cnf import Clause, Lit, neg, var_of


@dataclass(frozen=True)
class TheoryLemma:
    """A clause M_A => (±)predicate with an attached auxiliary-variable witness."""

    clause: Clause
    predicate_var: int
    head_sign: int
    witness: tuple[Lit, ...] = ()

    def __post_init__(self):
        heads = [l for l in self.clause if var_of(l) == self.predicate_var]
        if heads != [self.head_lit]:
            raise ValueError("lemma clause must contain exactly the head literal")

    @property
    def head_lit(self) -> Lit:
        return self.head_sign * self.predicate_var


def make_lemma(
    m_a: Sequence[Lit], predicate_var: int, head_sign: int, witness: Sequence[Lit] = ()
) -> TheoryLemma:
    """Build M_A => head as a clause: negated antecedent literals plus the head."""
    clause = tuple(neg(l) for l in m_a) + (head_sign * predicate_var,)
    return TheoryLemma(clause, predicate_var, head_sign, tuple(witness))


class TheoryBackend(Protocol):
    """What the kernel needs from a concrete theory predicate."""

    def evaluate(self, model: Mapping[int, bool]) -> bool:
        """Predicate value on a total input assignment."""
        ...

    def strengthen(
        self,
        sign: int,
        assigned: Mapping[int, bool],
        completion: Mapping[int, bool],
    ) -> tuple[tuple[Lit, ...], tuple[Lit, ...]]:
        """Return (antecedent literals M_A', witness literals) for a lemma.

        `assigned` is the currently-assigned part of the inputs, `completion`
        the monotone-extremal total assignment the propagation evaluated.
        """
        ...


@dataclass
class PredicateBinding:
    """Ties a CNF variable to a theory predicate instance."""

    predicate_var: int
    inputs: tuple[int, ...]
    polarity: dict[int, int]  # +1 positively monotonic, -1 negatively
    theory: TheoryBackend
    theory_id: str = ""

    def __post_init__(self):
        if self.predicate_var in self.inputs:
            raise ValueError("predicate variable cannot be one of its inputs")
        if len(set(self.inputs)) != len(self.inputs):
            raise ValueError("duplicate input variable")
        if set(self.polarity) != set(self.inputs):
            raise ValueError("polarity map must cover exactly the inputs")


def approximate(
    m: Mapping[int, bool], binding: PredicateBinding
) -> tuple[dict[int, bool], dict[int, bool]]:
    """Monotone-minimal and monotone-maximal completions of the input part of m.

    Unassigned positively-monotonic inputs go to False in M- and True in M+;
    negatively-monotonic inputs are flipped, per the positive-monotone rewrite.
    """
    lo: dict[int, bool] = {}
    hi: dict[int, bool] = {}
    for v in binding.inputs:
        if v in m:
            lo[v] = hi[v] = m[v]
        elif binding.polarity[v] > 0:
            lo[v], hi[v] = False, True
        else:
            lo[v], hi[v] = True, False
    return lo, hi


@dataclass(frozen=True, eq=False)
class LemmaHandle:
    """Deferred explanation of one theory propagation (identity-hashed)."""

    binding: PredicateBinding
    sign: int
    assigned: tuple[Lit, ...]  # input literals assigned when propagated
    completion: tuple[tuple[int, bool], ...]
    session: int


@dataclass
class TheoryResponse:
    implied: list[tuple[Lit, LemmaHandle]] = field(default_factory=list)
    conflict: LemmaHandle | None = None

    @property
    def ok(self) -> bool:
        return self.conflict is None


class SmmtKernel:
    """Theory hooks over a set of predicate bindings."""

    def __init__(self, bindings: Sequence[PredicateBinding] = ()):
        self.bindings = list(bindings)
        self._session = 0

    def variables(self) -> set[int]:
        """Every variable the kernel reads or assigns."""
        out = set()
        for b in self.bindings:
            out.add(b.predicate_var)
            out.update(b.inputs)
        return out

    def reset(self) -> None:
        self._session += 1

    def _handle(
        self, binding: PredicateBinding, sign: int, m: Mapping[int, bool], completion: dict[int, bool]
    ) -> LemmaHandle:
        assigned = tuple(
            (v if m[v] else -v) for v in binding.inputs if v in m
        )
        return LemmaHandle(
            binding, sign, assigned, tuple(sorted(completion.items())), self._session
        )

    def propagate(self, m: Mapping[int, bool]) -> TheoryResponse:
        """Evaluate every binding on its approximations; imply or conflict.

        Propagation suppresses implications whose predicate atom already has
        the implied value. Bindings are visited in order and all implications
        are collected before returning; the first contrary assignment wins as
        the conflict.
        """
        out = TheoryResponse()
        for b in self.bindings:
            lo, hi = approximate(m, b)
            pv = m.get(b.predicate_var)
            if b.theory.evaluate(lo):
                if pv is False:
                    out.conflict = self._handle(b, 1, m, lo)
                    return out
                if pv is None:
                    out.implied.append((b.predicate_var, self._handle(b, 1, m, lo)))
            elif not b.theory.evaluate(hi):
                if pv is True:
                    out.conflict = self._handle(b, -1, m, hi)
                    return out
                if pv is None:
                    out.implied.append((-b.predicate_var, self._handle(b, -1, m, hi)))
        return out

    def explain(self, handle: LemmaHandle) -> TheoryLemma:
        """Materialize the witness-strengthened lemma for a propagation."""
        if handle.session != self._session:
            raise ValueError("stale lemma handle")
        assigned = {var_of(l): l > 0 for l in handle.assigned}
        completion = dict(handle.completion)
        m_a, witness = handle.binding.theory.strengthen(
            handle.sign, assigned, completion
        )
        return make_lemma(m_a, handle.binding.predicate_var, handle.sign, witness)

    def final_check(self, model: Mapping[int, bool]) -> LemmaHandle | None:
        """Accept a total assignment or report the first violated binding."""
        for b in self.bindings:
            value = b.theory.evaluate({v: model[v] for v in b.inputs})
            if model.get(b.predicate_var) != value:
                lo, hi = approximate(model, b)
                sign = 1 if value else -1
                return self._handle(b, sign, model, lo if value else hi)
        return None


class DefaultStrengthening:
    """Mixin: antecedent = every assigned monotone-direction literal, no witness."""

    inputs: tuple[int, ...]
    polarity: dict[int, int]

    def strengthen(self, sign, assigned, completion):
        m_a = []
        for v in self.inputs:
            if v not in assigned:
                continue
            helping = assigned[v] == (self.polarity[v] > 0)
            if sign > 0 and helping:
                m_a.append(v if assigned[v] else -v)
            elif sign < 0 and not helping:
                m_a.append(v if assigned[v] else -v)
        return tuple(m_a), ()
