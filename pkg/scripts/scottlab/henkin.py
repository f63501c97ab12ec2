"""
Henkin constructions over a finite target
-----------------------------------------

The consistency property ``C_A`` of a finite structure ``A``: finite sets of
sentences in Henkin constants ``$0, $1, ...`` such that some injective
interpretation of those constants in ``A`` makes every sentence true. On top
of the membership test sit

* ``closure_step``: discharging a single closure obligation (conditions 1-5
  and the witness condition 7 for a target sentence),
* ``build_model_chain``: fair round-robin scheduling of all obligations and
  the structure read off the atomic sentences of the chain,
* ``extract_orbit_generator``: the least set ``S`` none of whose realizations
  falsifies a candidate Π_{<α} formula true of ``ā``, turned into the
  existential formula ``(∃x̄)χ``,
* ``extract_separator`` and ``d_sigma_scott_from_pair``: the d-Σ
  constructions that use the two searches above.

All searches are breadth-first over literal sets by size, then in the fixed
literal order, with constants allocated in ascending index order, so equal
inputs give byte-identical formulas.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass
from typing import Any, ClassVar, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .complexity import pi_rank, ranks, sigma_rank
from .errors import (
    ConstructionHalted,
    MalformedDemandError,
    PreconditionError,
    SearchBudgetExhausted,
)
from .ordinals import Ordinal
from .scott import atomic_diagram, verify_scott_sentence
from .semantics import Evaluator, Verdict3
from .sexpr import format_formula
from .structures import FinStructure, enumerate_structures
from .syntax import (
    TOP,
    And,
    App,
    Atom,
    Const,
    Exists,
    Forall,
    Formula,
    Henkin,
    Or,
    Schema,
    Term,
    Var,
    conj,
    distinct,
    eq,
    exists,
    fresh_name,
    forall,
    free_vars,
    henkin_constants,
    implication,
    negate,
    neq,
    pi_conjuncts,
    replace_henkins,
    sigma_disjuncts,
    substitute,
    tuple_vars,
)

logger = logging.getLogger(__name__)

DEFAULT_SEARCH_BUDGET = 20_000

SentenceSet = FrozenSet[Formula]
Assignment = Dict[int, int]


def sentence_key(sentence: Formula) -> str:
    return format_formula(sentence)


def sorted_sentences(sentences: Iterable[Formula]) -> List[Formula]:
    return sorted(sentences, key=sentence_key)


def _finite_alpha(alpha: Union[int, Ordinal]) -> int:
    alpha = Ordinal.of(alpha)
    if not alpha.is_finite or alpha.as_int < 2:
        raise PreconditionError(f"Henkin searches need a finite rank alpha >= 2, got {alpha}")
    return alpha.as_int


def _rank(sentence: Formula) -> Ordinal:
    sigma, pi = ranks(sentence)
    return sigma if sigma < pi else pi


def _instantiate(body: Formula, names: Sequence[str], constants: Sequence[int]) -> Formula:
    return substitute(body, {name: Henkin(index) for name, index in zip(names, constants)}, sentence=True)


# ---------------------------------------------------------------------------
# Membership
# ---------------------------------------------------------------------------


def cp_member(
    structure: FinStructure, sentences: Iterable[Formula], budget: int = 64
) -> Optional[Assignment]:
    """Least injective interpretation of the Henkin constants satisfying every sentence."""
    sentences = sorted_sentences(set(sentences))
    constants = sorted(set().union(*(henkin_constants(sentence) for sentence in sentences))) if sentences else []
    if len(constants) > structure.size:
        return None
    for image in itertools.permutations(range(structure.size), len(constants)):
        henkins = dict(zip(constants, image))
        evaluator = Evaluator(structure, budget=budget, henkins=henkins)
        if all(evaluator.evaluate(sentence) is Verdict3.TRUE for sentence in sentences):
            return henkins
    return None


def _satisfying_assignments(
    structure: FinStructure, literals: Sequence[Formula], constants: Sequence[int]
) -> Iterator[Assignment]:
    for image in itertools.permutations(range(structure.size), len(constants)):
        henkins = dict(zip(constants, image))
        evaluator = Evaluator(structure, henkins=henkins)
        if all(evaluator.evaluate(literal) is Verdict3.TRUE for literal in literals):
            yield henkins


# ---------------------------------------------------------------------------
# Demands
# ---------------------------------------------------------------------------


def _conjuncts(sentence: Formula, budget: int) -> List[Tuple[Tuple[str, ...], Formula]]:
    if isinstance(sentence, And) and isinstance(sentence.children, Schema):
        children, _ = sentence.children.expand(budget)
        return [((), child) for child in children]
    return pi_conjuncts(sentence)


def _disjuncts(sentence: Formula, budget: int) -> List[Tuple[Tuple[str, ...], Formula]]:
    if isinstance(sentence, Or) and isinstance(sentence.children, Schema):
        children, _ = sentence.children.expand(budget)
        return [((), child) for child in children]
    return sigma_disjuncts(sentence)


def _is_conjunctive(sentence: Formula) -> bool:
    return isinstance(sentence, (And, Forall))


def _is_disjunctive(sentence: Formula) -> bool:
    return isinstance(sentence, (Or, Exists))


@dataclass(frozen=True)
class Demand:
    condition: ClassVar[int] = 0

    def candidates(self, session: "ConsistencySession", sentences: SentenceSet) -> Iterator[Formula]:
        raise NotImplementedError

    def describe(self) -> Dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class ConjunctDemand(Demand):
    condition: ClassVar[int] = 1
    sentence: Formula = TOP
    index: int = 0
    constants: Tuple[int, ...] = ()

    def candidates(self, session, sentences):
        if self.sentence not in sentences:
            raise MalformedDemandError("Conjunct demand names a sentence outside the set")
        parts = _conjuncts(self.sentence, session.schema_budget)
        if not 0 <= self.index < len(parts):
            raise MalformedDemandError(f"Conjunction has no conjunct {self.index}")
        names, body = parts[self.index]
        if len(names) != len(self.constants):
            raise MalformedDemandError(f"Conjunct {self.index} binds {len(names)} variables, got {len(self.constants)} constants")
        yield _instantiate(body, names, self.constants)

    def describe(self):
        return {"condition": 1, "sentence": sentence_key(self.sentence), "index": self.index, "constants": list(self.constants)}


@dataclass(frozen=True)
class DisjunctDemand(Demand):
    condition: ClassVar[int] = 2
    sentence: Formula = TOP

    def candidates(self, session, sentences):
        if self.sentence not in sentences:
            raise MalformedDemandError("Disjunct demand names a sentence outside the set")
        for names, body in _disjuncts(self.sentence, session.schema_budget):
            for constants in itertools.product(session.pool, repeat=len(names)):
                yield _instantiate(body, names, constants)

    def describe(self):
        return {"condition": 2, "sentence": sentence_key(self.sentence)}


@dataclass(frozen=True)
class AtomicDemand(Demand):
    condition: ClassVar[int] = 3
    atom: Atom = Atom("=", ())

    def candidates(self, session, sentences):
        if not isinstance(self.atom, Atom) or free_vars(self.atom):
            raise MalformedDemandError("Atomic demand needs an atomic sentence")
        positive = Atom(self.atom.rel, self.atom.args)
        yield positive
        yield negate(positive)

    def describe(self):
        return {"condition": 3, "atom": sentence_key(self.atom)}


@dataclass(frozen=True)
class FunctionDemand(Demand):
    """``F(c̄) = d`` for some pool constant ``d``; a nullary symbol names a signature constant."""

    condition: ClassVar[int] = 4
    symbol: str = ""
    constants: Tuple[int, ...] = ()

    def candidates(self, session, sentences):
        functions = session.structure.signature.function_arity
        if self.symbol in functions:
            if functions[self.symbol] != len(self.constants):
                raise MalformedDemandError(f"Function {self.symbol} takes {functions[self.symbol]} arguments")
            term: Term = App(self.symbol, tuple(Henkin(index) for index in self.constants))
        elif self.symbol in session.structure.signature.constants and not self.constants:
            term = Const(self.symbol)
        else:
            raise MalformedDemandError(f"Unknown function symbol {self.symbol}")
        for value in session.pool:
            yield eq(term, Henkin(value))

    def describe(self):
        return {"condition": 4, "symbol": self.symbol, "constants": list(self.constants)}


@dataclass(frozen=True)
class EqualityDemand(Demand):
    condition: ClassVar[int] = 5
    left: int = 0
    right: int = 0

    def candidates(self, session, sentences):
        if self.left != self.right:
            raise MalformedDemandError(f"Distinct constants ${self.left} and ${self.right} cannot be equated")
        yield eq(Henkin(self.left), Henkin(self.right))

    def describe(self):
        return {"condition": 5, "left": self.left, "right": self.right}


@dataclass(frozen=True)
class WitnessDemand(Demand):
    """Witness the target sentence's conjunct ``index`` at ``constants``."""

    condition: ClassVar[int] = 7
    index: int = 0
    constants: Tuple[int, ...] = ()

    def candidates(self, session, sentences):
        if session.target is None:
            raise MalformedDemandError("Witness demands need a target sentence")
        clauses = session.target_clauses
        if not 0 <= self.index < len(clauses):
            raise MalformedDemandError(f"Target has no conjunct {self.index}")
        names, disjuncts = clauses[self.index]
        if len(names) != len(self.constants):
            raise MalformedDemandError(f"Target conjunct {self.index} binds {len(names)} variables")
        outer = dict(zip(names, (Henkin(index) for index in self.constants)))
        for inner_names, body in disjuncts:
            for witnesses in itertools.product(session.pool, repeat=len(inner_names)):
                assignment = dict(outer)
                assignment.update(zip(inner_names, (Henkin(index) for index in witnesses)))
                yield substitute(body, assignment, sentence=True)

    def describe(self):
        return {"condition": 7, "index": self.index, "constants": list(self.constants)}


# ---------------------------------------------------------------------------
# Sessions and chains
# ---------------------------------------------------------------------------


class ConsistencySession:
    """
    Single-owner state for one construction against a finite target.

    ``target`` is read as ``⋀_i (∀ū_i) ⋁_j (∃v̄_ij) ξ_ij``; every ξ must be
    Σ_β or Π_β with β+1 < alpha, the same bound every member of ``C_A``
    obeys.
    """

    def __init__(
        self,
        structure: FinStructure,
        alpha: Union[int, Ordinal] = 2,
        target: Optional[Formula] = None,
        budget: int = DEFAULT_SEARCH_BUDGET,
        schema_budget: int = 64,
    ):
        self.structure = structure
        self.alpha = _finite_alpha(alpha)
        self.target = target
        self.budget = budget
        self.schema_budget = schema_budget
        self.pool: Tuple[int, ...] = tuple(range(structure.size))
        self.transcript: List[Dict[str, Any]] = []
        self.target_clauses: List[Tuple[Tuple[str, ...], List[Tuple[Tuple[str, ...], Formula]]]] = []
        if target is not None:
            if free_vars(target):
                raise PreconditionError("Target must be a sentence")
            for names, body in _conjuncts(target, schema_budget):
                disjuncts = _disjuncts(body, schema_budget)
                for _, xi in disjuncts:
                    if not self.admits(xi):
                        raise PreconditionError(
                            f"Target subformula {format_formula(xi)} is too complex for alpha={self.alpha}"
                        )
                self.target_clauses.append((names, disjuncts))

    def admits(self, sentence: Formula) -> bool:
        return _rank(sentence) + Ordinal.of(1) < Ordinal.of(self.alpha)

    def member(self, sentences: Iterable[Formula]) -> Optional[Assignment]:
        return cp_member(self.structure, sentences, self.schema_budget)

    def log(self, event: str, **data: Any) -> None:
        entry = {"event": event, **data}
        self.transcript.append(entry)
        logger.debug("henkin %s", entry)

    def transcript_lines(self) -> List[str]:
        return [json.dumps(entry, sort_keys=True) for entry in self.transcript]

    def closure_step(self, sentences: SentenceSet, demand: Demand) -> Optional[SentenceSet]:
        """Least ``S' ⊇ S`` in ``C_A`` discharging ``demand``, or None."""
        sentences = frozenset(sentences)
        for candidate in demand.candidates(self, sentences):
            if candidate in sentences:
                return sentences
            extended = sentences | {candidate}
            if self.member(extended) is not None:
                self.log("extension", demand=demand.describe(), added=sentence_key(candidate))
                return extended
        return None

    # demand generation, in a fixed order per condition type

    def pending_demands(self, sentences: SentenceSet) -> Dict[int, List[Demand]]:
        pending: Dict[int, List[Demand]] = {1: [], 2: [], 3: [], 4: [], 7: []}
        for sentence in sorted_sentences(sentences):
            if isinstance(sentence, Atom):
                continue
            if _is_conjunctive(sentence):
                for index, (names, _) in enumerate(_conjuncts(sentence, self.schema_budget)):
                    for constants in itertools.product(self.pool, repeat=len(names)):
                        pending[1].append(ConjunctDemand(sentence, index, constants))
            elif _is_disjunctive(sentence):
                pending[2].append(DisjunctDemand(sentence))
        signature = self.structure.signature
        for name, arity in signature.relations:
            for constants in itertools.product(self.pool, repeat=arity):
                pending[3].append(AtomicDemand(Atom(name, tuple(Henkin(index) for index in constants))))
        for name, arity in signature.functions:
            for constants in itertools.product(self.pool, repeat=arity):
                pending[4].append(FunctionDemand(name, constants))
        for name in signature.constants:
            pending[4].append(FunctionDemand(name, ()))
        for index, (names, _) in enumerate(self.target_clauses):
            for constants in itertools.product(self.pool, repeat=len(names)):
                pending[7].append(WitnessDemand(index, constants))
        return pending


DEMAND_ORDER = (1, 2, 3, 4, 7)


@dataclass
class ChainResult:
    chain: List[SentenceSet]
    structure: Optional[FinStructure]
    pending: int
    steps: int
    all_true: bool = False

    @property
    def complete(self) -> bool:
        return self.pending == 0

    @property
    def final(self) -> SentenceSet:
        return self.chain[-1]


def build_model_chain(
    session: ConsistencySession, steps: int, initial: Iterable[Formula] = ()
) -> ChainResult:
    current: SentenceSet = frozenset(initial)
    for sentence in current:
        if not session.admits(sentence):
            raise PreconditionError(f"{format_formula(sentence)} is too complex for alpha={session.alpha}")
    if session.member(current) is None:
        raise PreconditionError("Initial sentence set is not realized in the target structure")

    chain: List[SentenceSet] = [current]
    done: Set[Demand] = set()
    taken = 0
    cursor = 0
    while taken < steps:
        pending = session.pending_demands(current)
        queues = {kind: [demand for demand in pending[kind] if demand not in done] for kind in DEMAND_ORDER}
        if not any(queues.values()):
            break
        for offset in range(len(DEMAND_ORDER)):
            kind = DEMAND_ORDER[(cursor + offset) % len(DEMAND_ORDER)]
            if queues[kind]:
                cursor = (cursor + offset + 1) % len(DEMAND_ORDER)
                demand = queues[kind][0]
                break
        session.log("demand", step=taken, demand=demand.describe())
        extended = session.closure_step(current, demand)
        if extended is None:
            session.log("halt", step=taken, demand=demand.describe())
            raise ConstructionHalted(
                f"No extension discharges condition {demand.condition} demand {demand.describe()}",
                demand=demand,
                chain=chain,
            )
        done.add(demand)
        current = extended
        chain.append(current)
        taken += 1

    remaining = session.pending_demands(current)
    left = sum(1 for kind in DEMAND_ORDER for demand in remaining[kind] if demand not in done)
    structure = read_off_structure(session.structure, current)
    all_true = False
    if structure is not None:
        evaluator = Evaluator(structure, budget=session.schema_budget, henkins={index: index for index in session.pool})
        all_true = all(evaluator.evaluate(sentence) is Verdict3.TRUE for sentence in current)
    logger.info("Chain of %s steps, %s demands pending", taken, left)
    return ChainResult(chain, structure, left, taken, all_true)


def read_off_structure(target: FinStructure, sentences: Iterable[Formula]) -> Optional[FinStructure]:
    """The structure on the pool constants named by the atomic sentences; None if a function is partial."""
    signature = target.signature
    size = target.size
    relations = {name: set() for name, _ in signature.relations}
    functions: Dict[str, Dict[Tuple[int, ...], int]] = {name: {} for name, _ in signature.functions}
    constants: Dict[str, int] = {}
    for sentence in sentences:
        if not isinstance(sentence, Atom) or not sentence.positive:
            continue
        if sentence.rel in relations and all(isinstance(arg, Henkin) for arg in sentence.args):
            relations[sentence.rel].add(tuple(arg.index for arg in sentence.args))
        elif sentence.rel == "=" and isinstance(sentence.args[1], Henkin):
            left, right = sentence.args
            if isinstance(left, App) and left.func in functions and all(isinstance(arg, Henkin) for arg in left.args):
                functions[left.func][tuple(arg.index for arg in left.args)] = right.index
            elif isinstance(left, Const):
                constants[left.name] = right.index

    relation_tables = {}
    for name, arity in signature.relations:
        table = np.zeros((size,) * arity, dtype=bool)
        for cell in relations[name]:
            table[cell] = True
        relation_tables[name] = table
    function_tables = {}
    for name, arity in signature.functions:
        cells = list(itertools.product(range(size), repeat=arity))
        if any(cell not in functions[name] for cell in cells):
            return None
        table = np.zeros((size,) * arity, dtype=np.int64)
        for cell in cells:
            table[cell] = functions[name][cell]
        function_tables[name] = table
    if any(name not in constants for name in signature.constants):
        return None
    return FinStructure(signature, size, relation_tables, function_tables, constants)


# ---------------------------------------------------------------------------
# Orbit generators
# ---------------------------------------------------------------------------


def _home(structure: FinStructure, tup: Sequence[int]) -> List[int]:
    """Elements in constant order: the distinct entries of ``tup`` first, then the rest ascending."""
    order: List[int] = []
    for element in tup:
        if element not in order:
            order.append(element)
    order += [element for element in range(structure.size) if element not in order]
    return order


def home_literals(structure: FinStructure, order: Sequence[int]) -> List[Formula]:
    """Diagram literals of ``structure`` with element ``order[i]`` named ``$i``."""
    terms = {element: Henkin(position) for position, element in enumerate(order)}
    return atomic_diagram(structure, order, terms)


def _frontier(size: int, literals: Sequence[Formula], start: Tuple[int, ...]) -> List[str]:
    return ["{" + ", ".join(format_formula(literals[i]) for i in start) + "}"] if start else [f"size {size}"]


def _search_sets(literals: Sequence[Formula], budget: int, what: str) -> Iterator[Tuple[int, ...]]:
    examined = 0
    for size in range(len(literals) + 1):
        logger.debug("%s: examining literal sets of size %s", what, size)
        for chosen in itertools.combinations(range(len(literals)), size):
            examined += 1
            if examined > budget:
                raise SearchBudgetExhausted(
                    f"{what}: search budget {budget} exhausted at literal sets of size {size}",
                    frontier=_frontier(size, literals, chosen),
                )
            yield chosen


def _diagram_sentence(structure: FinStructure, places: Sequence[int]) -> Formula:
    """``(∃ȳ)`` the full diagram of ``structure`` with x1..xk in ``places`` and ȳ elsewhere."""
    names = tuple_vars(len(places))
    rest = [element for element in range(structure.size) if element not in places]
    ys = tuple(f"y{i}" for i in range(1, len(rest) + 1))
    order = list(places) + rest
    terms: Dict[int, Term] = {element: Var(name) for element, name in zip(order, names + ys)}
    body = atomic_diagram(structure, order, terms) + distinct([terms[element] for element in order])
    return exists(ys, conj(body))


def _subformulas(formula: Formula) -> Iterator[Formula]:
    yield formula
    if isinstance(formula, (Forall, Exists)):
        yield from _subformulas(formula.body)
    elif isinstance(formula, (And, Or)) and not isinstance(formula.children, Schema):
        for child in formula.children:
            yield from _subformulas(child)


def pi_candidates(
    structure: FinStructure,
    width: int,
    alpha: Union[int, Ordinal] = 2,
    sentences: Sequence[Formula] = (),
) -> List[Formula]:
    """
    Π_{<α} formulas in x1..x_width the orbit-generator search tests realizations
    against: the negated diagram sentences of ``structure`` (Π₁, one per
    injective placement) and the subformulas of ``sentences`` with at most
    ``width`` free variables, renamed onto x̄ in every injective way.
    """
    limit = Ordinal.of(_finite_alpha(alpha))
    names = tuple_vars(width)
    found: Dict[str, Formula] = {}
    for places in itertools.permutations(range(structure.size), width):
        psi = negate(_diagram_sentence(structure, places))
        found.setdefault(sentence_key(psi), psi)
    for sentence in sentences:
        for sub in _subformulas(sentence):
            free = sorted(free_vars(sub))
            if len(free) > width or not pi_rank(sub) < limit:
                continue
            for targets in itertools.permutations(names, len(free)):
                psi = substitute(sub, {name: Var(target) for name, target in zip(free, targets)})
                found.setdefault(sentence_key(psi), psi)
    return [found[key] for key in sorted(found)]


class _CandidateTable:
    """Which candidates hold at which tuples, evaluated once per tuple."""

    def __init__(self, structure: FinStructure, candidates: Sequence[Formula], budget: int = 64):
        self._evaluator = Evaluator(structure, budget=budget)
        self._candidates = list(candidates)
        self._verdicts: Dict[Tuple[int, ...], List[Verdict3]] = {}

    def verdicts(self, values: Tuple[int, ...]) -> List[Verdict3]:
        if values not in self._verdicts:
            valuation = dict(zip(tuple_vars(len(values)), values))
            self._verdicts[values] = [self._evaluator.evaluate(psi, valuation) for psi in self._candidates]
        return self._verdicts[values]

    def violated(self, home: Tuple[int, ...], values: Tuple[int, ...]) -> bool:
        """Some candidate true of ``home`` is false of ``values``."""
        return any(
            at_home is Verdict3.TRUE and there is Verdict3.FALSE
            for at_home, there in zip(self.verdicts(home), self.verdicts(values))
        )


def extract_orbit_generator(
    structure: FinStructure,
    tup: Sequence[int],
    alpha: Union[int, Ordinal] = 2,
    budget: int = DEFAULT_SEARCH_BUDGET,
    sentences: Sequence[Formula] = (),
) -> Formula:
    """
    ``(∃ȳ)[S ∧ distinct]`` for the least literal set ``S`` true of ``ā``'s
    home assignment such that no injective realization of ``S`` falsifies a
    candidate Π_{<α} formula true of ``ā`` at the constants of ``ā``. Free
    variables are ``x1..xk`` in the positions of ``tup``.
    """
    alpha = _finite_alpha(alpha)
    tup = tuple(int(element) for element in tup)
    if not tup:
        return TOP
    order = _home(structure, tup)
    width = len(dict.fromkeys(tup))
    literals = home_literals(structure, order)
    table = _CandidateTable(structure, pi_candidates(structure, width, alpha, sentences))
    home = tuple(order[:width])
    position = {element: index for index, element in enumerate(order)}
    tuple_constants = [position[element] for element in tup]

    for chosen in _search_sets(literals, budget, f"orbit generator for {tup}"):
        selected = [literals[i] for i in chosen]
        mentioned = set().union(*(henkin_constants(literal) for literal in selected)) if selected else set()
        constants = sorted(mentioned | set(range(width)))
        if not any(
            table.violated(home, tuple(assignment[c] for c in range(width)))
            for assignment in _satisfying_assignments(structure, selected, constants)
        ):
            logger.info("Orbit generator for %s uses %s literals (alpha=%s)", tup, len(selected), alpha)
            return _generator_formula(tup, tuple_constants, width, constants, selected)
    raise AssertionError("the full diagram always isolates the orbit")


def _generator_formula(
    tup: Sequence[int], tuple_constants: Sequence[int], width: int, constants: Sequence[int], selected: Sequence[Formula]
) -> Formula:
    names = tuple_vars(len(tup))
    terms: Dict[int, Term] = {}
    pattern: List[Formula] = []
    for name, constant in zip(names, tuple_constants):
        if constant in terms:
            pattern.append(eq(Var(name), terms[constant]))
        else:
            terms[constant] = Var(name)
    bound: List[str] = []
    for constant in constants:
        if constant >= width:
            bound.append(f"y{len(bound) + 1}")
            terms[constant] = Var(bound[-1])
    body = [replace_henkins(literal, terms) for literal in selected] + pattern
    body += distinct([terms[constant] for constant in constants])
    if not body:
        # a lone x1 in a transitive structure
        body = [eq(Var(names[0]), Var(names[0]))]
    return exists(bound, conj(body))


# ---------------------------------------------------------------------------
# Separators
# ---------------------------------------------------------------------------


def _explicit_clauses(psi: Formula, budget: int):
    clauses = []
    for names, body in pi_conjuncts(psi):
        if isinstance(body, (And, Or)) and isinstance(body.children, Schema):
            raise PreconditionError("Separator extraction needs explicit conjunctions and disjunctions in psi")
        clauses.append((names, sigma_disjuncts(body)))
    return clauses


def check_disjoint(phi: Formula, psi: Formula, signature, bound: int, budget: int = 64, ceiling: Optional[int] = 100_000) -> None:
    for size in range(1, bound + 1):
        for candidate in enumerate_structures(signature, size, ceiling=ceiling):
            evaluator = Evaluator(candidate, budget=budget)
            if evaluator.evaluate(phi) is Verdict3.TRUE and evaluator.evaluate(psi) is Verdict3.TRUE:
                raise PreconditionError(f"Model classes are not disjoint: a structure of size {size} satisfies both")


def extract_separator(
    phi: Formula,
    psi: Formula,
    structure: FinStructure,
    bound: int,
    budget: int = DEFAULT_SEARCH_BUDGET,
    alpha: Optional[int] = None,
    schema_budget: int = 64,
    ceiling: Optional[int] = 100_000,
) -> Formula:
    """
    A d-Σ sentence true in ``structure`` and false in every model of ``psi``:
    ``(∃ū x̄)ρ ∧ (∀ū)[(∃x̄)ρ → ⋀_j (∀v̄_j) neg θ_j]`` for the least literal set,
    conjunct index and constant tuple with no extension by any θ.
    """
    if alpha is None:
        alpha = max(2, _finite_rank(pi_rank(phi)), _finite_rank(pi_rank(psi)))
    alpha = _finite_alpha(alpha)
    if Evaluator(structure, budget=schema_budget).evaluate(phi) is not Verdict3.TRUE:
        raise PreconditionError("The structure does not satisfy phi")
    clauses = _explicit_clauses(psi, schema_budget)
    check_disjoint(phi, psi, structure.signature, bound, schema_budget, ceiling)

    literals = home_literals(structure, list(range(structure.size)))
    pool = tuple(range(structure.size))
    for chosen in _search_sets(literals, budget, "separator"):
        selected = [literals[i] for i in chosen]
        if cp_member(structure, selected, schema_budget) is None:
            continue
        for index, (names, disjuncts) in enumerate(clauses):
            for constants in itertools.product(pool, repeat=len(names)):
                if _blocks_every_witness(structure, selected, names, constants, disjuncts, pool, schema_budget):
                    logger.info("Separator found: %s literals, conjunct %s, constants %s", len(selected), index, constants)
                    return _bounded_by(_separator_formula(selected, names, constants, disjuncts), alpha)
    raise SearchBudgetExhausted("separator: every literal set admits a witness", frontier=[])


def _bounded_by(separator: Formula, alpha: int) -> Formula:
    sigma_part, pi_part = separator.children
    found = (_finite_rank(sigma_rank(sigma_part)), _finite_rank(pi_rank(pi_part)))
    if max(found) >= alpha:
        raise PreconditionError(
            f"Separator conjuncts classify (Sigma,{found[0]}) and (Pi,{found[1]}), not below alpha={alpha}"
        )
    return separator


def _blocks_every_witness(structure, selected, names, constants, disjuncts, pool, budget) -> bool:
    outer = {name: Henkin(index) for name, index in zip(names, constants)}
    for inner, theta in disjuncts:
        for witnesses in itertools.product(pool, repeat=len(inner)):
            assignment = dict(outer)
            assignment.update({name: Henkin(index) for name, index in zip(inner, witnesses)})
            instance = substitute(theta, assignment, sentence=True)
            if cp_member(structure, list(selected) + [instance], budget) is not None:
                return False
    return True


def _separator_formula(selected, names, constants, disjuncts) -> Formula:
    # each constant of c̄ goes to the least-index variable of ū it was assigned to
    terms: Dict[int, Term] = {}
    parts: List[Formula] = []
    for name, constant in zip(names, constants):
        if constant in terms:
            parts.append(eq(Var(name), terms[constant]))
        else:
            terms[constant] = Var(name)
    firsts = list(terms.values())
    parts += distinct(firsts)

    avoid = set(names)
    for inner, theta in disjuncts:
        avoid |= set(inner) | set(free_vars(theta))
    mentioned = set().union(*(henkin_constants(literal) for literal in selected)) if selected else set()
    bound: List[str] = []
    for constant in sorted(mentioned):
        if constant not in terms:
            bound.append(fresh_name("x1", avoid))
            avoid.add(bound[-1])
            terms[constant] = Var(bound[-1])
    extras = [Var(name) for name in bound]
    parts += distinct(extras) + [neq(first, extra) for first in firsts for extra in extras]
    rho = conj([replace_henkins(literal, terms) for literal in selected] + parts)

    consequent = conj(forall(inner, negate(theta)) for inner, theta in disjuncts)
    sigma_part = exists(tuple(names) + tuple(bound), rho)
    pi_part = forall(names, implication(exists(bound, rho), consequent))
    return And((sigma_part, pi_part))


def _finite_rank(rank: Ordinal) -> int:
    if not rank.is_finite:
        raise PreconditionError(f"Henkin searches need finite ranks, got {rank}")
    return rank.as_int


# ---------------------------------------------------------------------------
# d-Σ Scott sentences from a Σ/Π pair
# ---------------------------------------------------------------------------


def d_sigma_scott_from_pair(
    structure: FinStructure,
    sigma_sentence: Formula,
    pi_sentence: Formula,
    bound: int,
    budget: int = DEFAULT_SEARCH_BUDGET,
    schema_budget: int = 64,
    ceiling: Optional[int] = 100_000,
) -> Formula:
    """``(∃x̄)γ ∧ (∀x̄)(γ → φ_i)`` for the least satisfied disjunct ``φ_i`` of the Σ sentence."""
    for label, sentence in (("sigma", sigma_sentence), ("pi", pi_sentence)):
        report = verify_scott_sentence(sentence, structure, bound, schema_budget, ceiling)
        if not report.ok:
            raise PreconditionError(f"The {label} sentence is not a Scott sentence at size <= {bound}: {report.summary()}")
    rank = sigma_rank(sigma_sentence)
    if not rank.is_finite or rank.as_int < 2:
        raise PreconditionError(f"The sigma sentence must be Sigma_(alpha+1) with finite alpha >= 1, got rank {rank}")
    alpha = rank.as_int - 1

    evaluator = Evaluator(structure, budget=schema_budget)
    for names, body in sigma_disjuncts(sigma_sentence):
        for tup in itertools.product(range(structure.size), repeat=len(names)):
            if evaluator.evaluate(body, dict(zip(names, tup))) is not Verdict3.TRUE:
                continue
            logger.info("Disjunct witnessed by %s", tup)
            xs = tuple_vars(len(tup))
            phi_i = substitute(body, {name: Var(x) for name, x in zip(names, xs)})
            gamma = extract_orbit_generator(structure, tup, alpha + 1, budget, sentences=(phi_i,))
            return And((exists(xs, gamma), forall(xs, implication(gamma, phi_i))))
    raise PreconditionError("No disjunct of the sigma sentence holds in the structure")
