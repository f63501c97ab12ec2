"""
Scott sentences for finite structures
-------------------------------------

Orbit-defining formulas, the Scott sentence assembled from an orbit family,
back-and-forth families built from those formulas, and the exhaustive
verification sweep that compares a candidate sentence with the isomorphism
oracle on every structure up to a size bound.

Variable conventions: a formula for k-tuples has free variables
``x1..xk``; the extension variable in the back-and-forth clauses is
``x{k+1}``; elements outside the tuple are bound as ``y1, y2, ...`` and the
covering variable is ``z``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import pandas as pd

from .errors import BudgetExceededError, IncompleteFamilyError, UnboundVariableError
from .games import PartialMap, as_partial_map, is_partial_isomorphism
from .semantics import Evaluator, Verdict3
from .structures import FinStructure, automorphism_orbits, count_structures, enumerate_structures, isomorphic
from .syntax import (
    BOTTOM,
    TOP,
    And,
    App,
    Atom,
    Const,
    Forall,
    Formula,
    Or,
    Term,
    Var,
    conj,
    disj,
    distinct,
    eq,
    exists,
    forall,
    free_vars,
    implication,
    tuple_vars,
)

logger = logging.getLogger(__name__)

ElementTuple = Tuple[int, ...]


def tuple_valuation(tup: Sequence[int]) -> Dict[str, int]:
    return dict(zip(tuple_vars(len(tup)), tup))


def _dedupe(formulas: Iterable[Formula]) -> List[Formula]:
    seen = set()
    kept = []
    for formula in formulas:
        if formula not in seen:
            seen.add(formula)
            kept.append(formula)
    return kept


# ---------------------------------------------------------------------------
# Orbit formulas
# ---------------------------------------------------------------------------


def atomic_diagram(structure: FinStructure, order: Sequence[int], terms: Mapping[int, Term]) -> List[Formula]:
    """Every atomic fact and negated fact about ``order``, written with ``terms``."""
    literals: List[Formula] = []
    for name, arity in structure.signature.relations:
        table = structure.relation(name)
        for cell in itertools.product(order, repeat=arity):
            args = tuple(terms[element] for element in cell)
            literals.append(Atom(name, args, positive=bool(table[cell]) if arity else bool(table)))
    for name, arity in structure.signature.functions:
        table = structure.function(name)
        for cell in itertools.product(order, repeat=arity):
            args = tuple(terms[element] for element in cell)
            literals.append(eq(App(name, args), terms[int(table[cell])]))
    for name, value in sorted(structure.constants.items()):
        literals.append(eq(Const(name), terms[value]))
    return literals


def orbit_formula(structure: FinStructure, tup: Sequence[int], covering: bool = True) -> Formula:
    """
    ``(∃ȳ)[diagram ∧ x̄ pattern ∧ distinct ∧ (∀z)⋁ z = ·]`` whose satisfying
    tuples in ``structure`` are exactly the automorphism orbit of ``tup``.
    Without the covering clause the formula is Σ1 and still defines the orbit
    inside ``structure``, but no longer pins the universe size elsewhere.
    """
    tup = tuple(int(element) for element in tup)
    names = tuple_vars(len(tup))
    terms: Dict[int, Term] = {}
    pattern: List[Formula] = []
    for position, element in enumerate(tup):
        if element in terms:
            pattern.append(eq(Var(names[position]), terms[element]))
        else:
            terms[element] = Var(names[position])
    order = list(terms)
    bound: List[str] = []
    for element in range(structure.size):
        if element not in terms:
            bound.append(f"y{len(bound) + 1}")
            terms[element] = Var(bound[-1])
            order.append(element)

    parts = atomic_diagram(structure, order, terms) + pattern
    parts += distinct([terms[element] for element in order])
    if covering:
        parts.append(Forall(("z",), disj(eq(Var("z"), terms[element]) for element in order)))
    return exists(bound, conj(parts))


def diagram_sentence(structure: FinStructure) -> Formula:
    """The Σ2 sentence describing ``structure`` up to isomorphism."""
    return orbit_formula(structure, ())


def satisfying_tuples(structure: FinStructure, formula: Formula, k: int, budget: int = 64) -> List[ElementTuple]:
    evaluator = Evaluator(structure, budget=budget)
    return [
        tup
        for tup in itertools.product(range(structure.size), repeat=k)
        if evaluator.evaluate(formula, tuple_valuation(tup)) is Verdict3.TRUE
    ]


@dataclass
class OrbitFamily:
    structure: FinStructure
    formulas: Dict[ElementTuple, Formula]
    max_length: int

    @classmethod
    def build(cls, structure: FinStructure, max_length: Optional[int] = None, covering: bool = True) -> "OrbitFamily":
        length = structure.size if max_length is None else max_length
        formulas = {
            tup: orbit_formula(structure, tup, covering=covering)
            for k in range(1, length + 1)
            for tup in itertools.product(range(structure.size), repeat=k)
        }
        logger.debug("Built %s orbit formulas up to length %s", len(formulas), length)
        return cls(structure, formulas, length)

    def formula(self, tup: Sequence[int]) -> Formula:
        try:
            return self.formulas[tuple(tup)]
        except KeyError:
            raise IncompleteFamilyError(f"Orbit family has no formula for tuple {tuple(tup)}") from None

    def missing(self) -> List[ElementTuple]:
        return [
            tup
            for k in range(1, self.max_length + 1)
            for tup in itertools.product(range(self.structure.size), repeat=k)
            if tup not in self.formulas
        ]

    def verify(self, budget: int = 64) -> List[ElementTuple]:
        """Tuples whose formula does not carve out exactly their orbit."""
        failures: List[ElementTuple] = []
        orbits: Dict[int, Dict[ElementTuple, FrozenSet[ElementTuple]]] = {}
        for tup, formula in sorted(self.formulas.items()):
            k = len(tup)
            if k not in orbits:
                orbits[k] = {
                    member: frozenset(block)
                    for block in automorphism_orbits(self.structure, k)
                    for member in block
                }
            if frozenset(satisfying_tuples(self.structure, formula, k, budget)) != orbits[k][tup]:
                failures.append(tup)
        return failures


def scott_sentence_from_orbits(structure: FinStructure, family: OrbitFamily) -> Formula:
    """``⋀ ρ_ā`` over tuples shorter than the family's length bound."""
    length = family.max_length
    if length < 1:
        raise IncompleteFamilyError("Orbit family must reach tuples of length 1")
    missing = family.missing()
    if missing:
        raise IncompleteFamilyError(f"Orbit family has no formula for tuple {missing[0]}")

    elements = range(structure.size)
    clauses: List[Formula] = []
    for k in range(length):
        names = tuple_vars(k + 1)
        extension = names[-1]
        for tup in itertools.product(elements, repeat=k):
            children = _dedupe(family.formula(tup + (b,)) for b in elements)
            consequent = And(
                (
                    conj(exists((extension,), child) for child in children),
                    Forall((extension,), disj(children)),
                )
            )
            if k == 0:
                clauses.append(consequent)
            else:
                clauses.append(forall(names[:-1], implication(family.formula(tup), consequent)))
    sentence = conj(_dedupe(clauses))
    logger.info("Scott sentence for a %s-element structure has %s clauses", structure.size, len(clauses))
    return sentence


def guard_formula(flag: bool, formula: Formula) -> Formula:
    return And((formula, TOP if flag else BOTTOM))


def orbit_candidates(structure: FinStructure, max_length: Optional[int] = None) -> Dict[int, List[Formula]]:
    """One orbit formula per orbit of k-tuples, keyed by k."""
    length = structure.size if max_length is None else max_length
    return {
        k: [orbit_formula(structure, block[0]) for block in automorphism_orbits(structure, k)]
        for k in range(1, length + 1)
    }


def guarded_orbit_family(
    structure: FinStructure,
    candidates: Mapping[int, Sequence[Formula]],
    max_length: Optional[int] = None,
    budget: int = 64,
) -> OrbitFamily:
    """``φ_c̄ = ⋁_e guard(A ⊨ ψ_e(c̄), ψ_e)`` for every tuple ``c̄``."""
    length = structure.size if max_length is None else max_length
    evaluator = Evaluator(structure, budget=budget)
    formulas: Dict[ElementTuple, Formula] = {}
    for k in range(1, length + 1):
        family = list(candidates.get(k, ()))
        for tup in itertools.product(range(structure.size), repeat=k):
            valuation = tuple_valuation(tup)
            flags = [evaluator.evaluate(psi, valuation) is Verdict3.TRUE for psi in family]
            if not any(flags):
                raise IncompleteFamilyError(f"No candidate formula holds of tuple {tup}")
            formulas[tup] = Or(tuple(guard_formula(flag, psi) for flag, psi in zip(flags, family)))
    return OrbitFamily(structure, formulas, length)


def scott_family_sentence(
    structure: FinStructure,
    candidates: Optional[Mapping[int, Sequence[Formula]]] = None,
    max_length: Optional[int] = None,
    budget: int = 64,
) -> Formula:
    if candidates is None:
        candidates = orbit_candidates(structure, max_length)
    family = guarded_orbit_family(structure, candidates, max_length, budget)
    return scott_sentence_from_orbits(structure, family)


# ---------------------------------------------------------------------------
# Back-and-forth families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteMapFamily:
    maps: FrozenSet[PartialMap] = field(default_factory=frozenset)

    @classmethod
    def of(cls, maps: Iterable[Iterable[Tuple[int, int]]]) -> "FiniteMapFamily":
        return cls(frozenset(as_partial_map(pairs) for pairs in maps))

    def invalid_maps(self, a: FinStructure, b: FinStructure) -> List[PartialMap]:
        return sorted(pairs for pairs in self.maps if not is_partial_isomorphism(a, b, pairs))

    def __len__(self) -> int:
        return len(self.maps)


def check_back_and_forth(family: FiniteMapFamily, a: FinStructure, b: FinStructure) -> bool:
    """
    Every map in the family is a partial isomorphism and extends inside the
    family to any further element of ``a`` (forth) and of ``b`` (back). An
    empty family passes vacuously.
    """
    invalid = family.invalid_maps(a, b)
    if invalid:
        logger.debug("Partial maps %s are not partial isomorphisms", invalid)
        return False
    maps = [(pairs, set(pairs)) for pairs in sorted(family.maps)]
    for pairs, pair_set in maps:
        extensions = [other_set for _, other_set in maps if pair_set <= other_set]
        domains = {x for extension in extensions for x, _ in extension}
        images = {y for extension in extensions for _, y in extension}
        if domains != set(range(a.size)) or images != set(range(b.size)):
            logger.debug("Partial map %s has no extension covering every element", pairs)
            return False
    return True


def family_from_orbit_formulas(
    a: FinStructure, b: FinStructure, family: OrbitFamily, budget: int = 64
) -> FiniteMapFamily:
    """Maps ``ā ↦ b̄`` with ``B ⊨ φ_ā(b̄)``, plus the empty map."""
    evaluator = Evaluator(b, budget=budget)
    maps = {()}
    for tup, formula in sorted(family.formulas.items()):
        for image in itertools.product(range(b.size), repeat=len(tup)):
            if evaluator.evaluate(formula, tuple_valuation(image)) is not Verdict3.TRUE:
                continue
            mapping: Dict[int, int] = {}
            if all(mapping.setdefault(x, y) == y for x, y in zip(tup, image)):
                if len(set(mapping.values())) == len(mapping):
                    maps.add(as_partial_map(mapping.items()))
    return FiniteMapFamily(frozenset(maps))


# ---------------------------------------------------------------------------
# Verification sweep
# ---------------------------------------------------------------------------

REPORT_COLUMNS = ["size", "position", "verdict", "isomorphic", "status"]


@dataclass
class VerificationReport:
    structure: FinStructure
    max_size: int
    budget: int
    frame: pd.DataFrame

    @property
    def mismatches(self) -> pd.DataFrame:
        return self.frame[self.frame["status"].isin(["false_positive", "false_negative"])]

    @property
    def unknowns(self) -> pd.DataFrame:
        return self.frame[self.frame["status"] == "unknown"]

    @property
    def missing_class(self) -> bool:
        """No structure isomorphic to the target satisfied the sentence."""
        hits = self.frame[self.frame["isomorphic"] & (self.frame["verdict"] == Verdict3.TRUE.value)]
        return hits.empty

    @property
    def ok(self) -> bool:
        return self.mismatches.empty and self.unknowns.empty

    def summary(self) -> Dict[str, int]:
        counts = self.frame["status"].value_counts()
        return {status: int(counts.get(status, 0)) for status in ("match", "false_positive", "false_negative", "unknown")}

    def to_text(self) -> str:
        lines = [
            f"Scott sentence sweep over all structures of size 1..{self.max_size} (finite surrogate check)",
            f"target size: {self.structure.size}  schema budget: {self.budget}  structures checked: {len(self.frame)}",
        ]
        lines += [f"{status}: {count}" for status, count in self.summary().items()]
        if self.missing_class:
            lines.append("target isomorphism class not satisfied")
        flagged = self.frame[self.frame["status"] != "match"]
        if not flagged.empty:
            lines.append("flagged:")
            for row in flagged.itertuples(index=False):
                lines.append(f"  size={row.size} position={row.position} verdict={row.verdict} status={row.status}")
        return "\n".join(lines) + "\n"


def _status(verdict: Verdict3, iso: bool) -> str:
    if verdict is Verdict3.UNKNOWN:
        return "unknown"
    if (verdict is Verdict3.TRUE) == iso:
        return "match"
    return "false_positive" if verdict is Verdict3.TRUE else "false_negative"


def verify_scott_sentence(
    sentence: Formula,
    structure: FinStructure,
    max_size: int,
    budget: int = 64,
    ceiling: Optional[int] = 100_000,
) -> VerificationReport:
    remaining = free_vars(sentence)
    if remaining:
        raise UnboundVariableError(f"Scott sentence has free variables: {', '.join(sorted(remaining))}")
    signature = structure.signature
    total = sum(count_structures(signature, size) for size in range(1, max_size + 1))
    if ceiling is not None and total > ceiling:
        raise BudgetExceededError(
            f"Verification over {total} structures exceeds the ceiling {ceiling}", count=total
        )
    logger.info("Verifying a Scott sentence over %s structures of size <= %s", total, max_size)

    rows = []
    for size in range(1, max_size + 1):
        for position, candidate in enumerate(enumerate_structures(signature, size, ceiling=None)):
            verdict = Evaluator(candidate, budget=budget).evaluate(sentence)
            iso = size == structure.size and isomorphic(candidate, structure) is not None
            rows.append(
                {
                    "size": size,
                    "position": position,
                    "verdict": verdict.value,
                    "isomorphic": iso,
                    "status": _status(verdict, iso),
                }
            )
    frame = pd.DataFrame(rows, columns=REPORT_COLUMNS)
    return VerificationReport(structure, max_size, budget, frame)
