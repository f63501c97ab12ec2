"""
Finitely generated groups
-------------------------

Groups are presented through oracles with an exact canonical form, so the
word problem is a dictionary lookup:

* ``finite-table``: a multiplication table over ``0..n-1``;
* ``fg-abelian``: integer vectors with one modulus per cyclic factor
  (0 for a copy of Z), given directly or through a relation matrix reduced
  with Smith normal form;
* ``free``: freely reduced words;
* ``infinite-dihedral``: pairs ``(k, e)`` standing for ``a^k b^e``.

Formulas about groups use the signature ``{*, inv, e}``. ``GroupBall`` lets
the evaluator run over the ball of a given radius: finite oracles are always
evaluated over the whole group, infinite ones get the sound three-valued
reading (a universal without counterexample or an existential without
witness stays unknown). The ``relators`` and ``words`` schemas and the
generation clause ``(∀y) ⋁_w w(x̄) = y`` are decided by the oracle directly.
Oracles that know their orbit formula also certify the ``roots`` schema at
root-free tuples and the sentence saying every tuple satisfying that formula
generates the group.

Group files are JSON, for example ``{"kind": "fg-abelian", "invariants": [2, 0]}``
for Z/2 × Z.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, ValidationError
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form

from .complexity import Classification
from .errors import ExtractionFailure, GroupFormatError, PreconditionError, SignatureMismatchError
from .schemas import SchemaEnumerator, register_enumerator
from .semantics import Evaluator, Universe, Verdict3, check_arity
from .sexpr import format_formula
from .syntax import (
    And,
    Const,
    Exists,
    Forall,
    Formula,
    Or,
    Schema,
    Signature,
    Var,
    eq,
    exists,
    forall,
    free_vars,
    fresh_name,
    implication,
    negate,
    neq,
    sigma_disjuncts,
    substitute,
    term_vars,
    tuple_vars,
    var_terms,
)
from .words import (
    IDENTITY,
    INVERSE,
    MULTIPLY,
    Word,
    alphabet,
    count_reduced_words,
    format_word,
    free_reduce,
    inverse_word,
    monomial_word,
    power_word,
    reduced_words,
    root_pair_at,
    word_at,
    word_term,
)

logger = logging.getLogger(__name__)

GROUP_SIGNATURE = Signature.build(functions={MULTIPLY: 2, INVERSE: 1}, constants=[IDENTITY])

DEFAULT_RADIUS = 4
DEFAULT_LENGTH = 3
WORD_SEARCH_LIMIT = 4096
ORACLE_CACHE_SIZE = 128

Element = Any


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


class GroupOracle:
    """A finitely generated group with a decidable word problem."""

    kind = ""
    is_finite = False

    def __init__(self, generators: Sequence[Element], name: str = ""):
        self.generators: Tuple[Element, ...] = tuple(generators)
        self.name = name or self.kind
        self._ball = lru_cache(maxsize=ORACLE_CACHE_SIZE)(self._compute_ball)
        self._reach = lru_cache(maxsize=ORACLE_CACHE_SIZE)(self._compute_reach)

    @property
    def identity(self) -> Element:
        raise NotImplementedError

    def multiply(self, a: Element, b: Element) -> Element:
        raise NotImplementedError

    def inverse(self, a: Element) -> Element:
        raise NotImplementedError

    def canonical(self, data: Any) -> Element:
        """Element from its JSON form; raises ``GroupFormatError`` when invalid."""
        raise NotImplementedError

    def to_data(self, element: Element) -> Any:
        return list(element) if isinstance(element, tuple) else element

    def elements(self) -> List[Element]:
        raise NotImplementedError(f"{self.kind} groups are infinite")

    @property
    def order(self) -> Optional[int]:
        return len(self.elements()) if self.is_finite else None

    def describe(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "name": self.name,
            "generators": [self.to_data(g) for g in self.generators],
            "order": self.order if self.is_finite else "infinite",
        }

    def evaluate_word(self, word: Sequence[int], values: Sequence[Element]) -> Element:
        result = self.identity
        for letter in word:
            value = values[abs(letter) - 1]
            result = self.multiply(result, value if letter > 0 else self.inverse(value))
        return result

    def _search(
        self, values: Sequence[Element], depth: Optional[int] = None, limit: Optional[int] = None
    ) -> Dict[Element, Word]:
        """Breadth-first search from the identity; each element maps to its shortlex-least word."""
        letters = alphabet(len(values))
        steps = {letter: values[letter - 1] if letter > 0 else self.inverse(values[-letter - 1]) for letter in letters}
        found: Dict[Element, Word] = {self.identity: ()}
        frontier = [self.identity]
        level = 0
        while frontier and (depth is None or level < depth):
            level += 1
            layer = []
            for element in frontier:
                word = found[element]
                for letter in letters:
                    if word and word[-1] == -letter:
                        continue
                    candidate = self.multiply(element, steps[letter])
                    if candidate in found:
                        continue
                    found[candidate] = word + (letter,)
                    layer.append(candidate)
                    if limit is not None and len(found) >= limit:
                        return found
            frontier = layer
        return found

    def ball(self, radius: int) -> List[Element]:
        """Elements of word length at most ``radius`` in the generators, in BFS order."""
        return self._ball(radius)

    def _compute_ball(self, radius: int) -> List[Element]:
        return list(self._search(self.generators, depth=radius))

    def subgroup_ball(self, values: Sequence[Element], radius: int) -> List[Element]:
        return list(self._search(tuple(values), depth=radius))

    def reach(self, values: Sequence[Element], limit: int) -> Dict[Element, Word]:
        """Subgroup generated by ``values``: exact for finite groups, the first ``limit`` elements otherwise."""
        return self._reach(tuple(values), None if self.is_finite else limit)

    def _compute_reach(self, values: Tuple[Element, ...], limit: Optional[int]) -> Dict[Element, Word]:
        return self._search(values, limit=limit)

    def express(self, target: Element, values: Sequence[Element], limit: int = WORD_SEARCH_LIMIT) -> Optional[Word]:
        return self.reach(values, limit).get(target)

    def generates(self, values: Sequence[Element], limit: int) -> bool:
        reached = self.reach(values, limit)
        return all(generator in reached for generator in self.generators)

    def spot_check(self, radius: int = 2, sample: int = 8) -> List[str]:
        """Group-axiom failures over the ball of ``radius`` (associativity on its first ``sample`` elements)."""
        failures = []
        elements = self.ball(radius)
        for a in elements:
            if self.multiply(a, self.identity) != a or self.multiply(self.identity, a) != a:
                failures.append(f"identity fails at {self.to_data(a)}")
            if self.multiply(a, self.inverse(a)) != self.identity:
                failures.append(f"inverse fails at {self.to_data(a)}")
        for a, b, c in itertools.product(elements[:sample], repeat=3):
            if self.multiply(self.multiply(a, b), c) != self.multiply(a, self.multiply(b, c)):
                failures.append(f"associativity fails at {[self.to_data(x) for x in (a, b, c)]}")
        return failures

    def pi1_orbit_formula(self, length: int) -> Optional[Formula]:
        """Known Π₁ definition of the orbit of the generating tuple, truncated at ``length``."""
        return None

    def orbit_formula_generates(self, length: int) -> bool:
        """Whether every tuple satisfying ``pi1_orbit_formula(length)`` in the group generates it."""
        return False

    def certifies_root_free(self, values: Sequence[Element]) -> bool:
        """
        True when no ``yⁿ = x̄^m̄`` with n ≥ 2 and gcd(n, m̄) = 1 is solvable in
        the group at ``values``. False means no certificate, not that a root exists.
        """
        return False

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r})"


class FiniteTableGroup(GroupOracle):
    kind = "finite-table"
    is_finite = True

    def __init__(self, table: Sequence[Sequence[int]], generators: Optional[Sequence[int]] = None, name: str = ""):
        table = np.asarray(table, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
            raise GroupFormatError("Multiplication table must be a non-empty square")
        n = table.shape[0]
        if table.min() < 0 or table.max() >= n:
            raise GroupFormatError("Multiplication table leaves 0..n-1")
        elements = np.arange(n)
        identities = [e for e in range(n) if (table[e] == elements).all() and (table[:, e] == elements).all()]
        if not identities:
            raise GroupFormatError("Multiplication table has no identity")
        left = table[table[:, :, None], elements[None, None, :]]
        right = table[elements[:, None, None], table[None, :, :]]
        if not (left == right).all():
            raise GroupFormatError("Multiplication table is not associative")
        self._identity = identities[0]
        hits = table == self._identity
        if not hits.any(axis=1).all():
            raise GroupFormatError("Some element has no inverse")
        self._inverses = hits.argmax(axis=1)
        self.table = table
        self.table.setflags(write=False)
        self._size = n
        super().__init__((), name=name)
        if generators is None:
            generators = self._greedy_generators()
        self.generators = tuple(self.canonical(g) for g in generators)
        if len(self._search(self.generators)) != n:
            raise GroupFormatError("Listed generators do not generate the group")

    def _greedy_generators(self) -> List[int]:
        chosen: List[int] = []
        closure = {self._identity}
        for element in range(self._size):
            if element not in closure:
                chosen.append(element)
                closure = set(self._search(chosen))
        return chosen

    @property
    def identity(self) -> int:
        return self._identity

    def multiply(self, a, b):
        return int(self.table[a, b])

    def inverse(self, a):
        return int(self._inverses[a])

    def canonical(self, data):
        if isinstance(data, bool) or not isinstance(data, (int, np.integer)) or not 0 <= data < self._size:
            raise GroupFormatError(f"{data!r} is not an element of a group of order {self._size}")
        return int(data)

    def elements(self):
        return list(range(self._size))


class AbelianGroup(GroupOracle):
    """``Z/d_1 × ... × Z/d_r × Z^f``; a modulus of 0 marks a copy of Z."""

    kind = "fg-abelian"

    def __init__(self, invariants: Sequence[int], name: str = ""):
        if any(d < 0 for d in invariants):
            raise GroupFormatError(f"Invariant factors must be non-negative, got {list(invariants)}")
        self.moduli: Tuple[int, ...] = tuple(int(d) for d in invariants if d != 1)
        self.is_finite = all(d > 0 for d in self.moduli)
        width = len(self.moduli)
        super().__init__(tuple(tuple(int(i == j) for j in range(width)) for i in range(width)), name=name)

    @classmethod
    def from_relations(cls, relations: Sequence[Sequence[int]], name: str = "") -> "AbelianGroup":
        """Abelian group on ``len(row)`` generators subject to the given relation rows."""
        if not relations or len({len(row) for row in relations}) != 1 or not relations[0]:
            raise GroupFormatError("Relation matrix must be a non-empty rectangle")
        columns = len(relations[0])
        normal = smith_normal_form(Matrix(relations), domain=ZZ)
        diagonal = [abs(int(normal[i, i])) for i in range(min(normal.shape))]
        torsion = [d for d in diagonal if d > 1]
        free = columns - sum(1 for d in diagonal if d != 0)
        return cls(torsion + [0] * free, name=name)

    @property
    def identity(self):
        return (0,) * len(self.moduli)

    def _reduce(self, vector: Sequence[int]) -> Tuple[int, ...]:
        return tuple(value % d if d else value for value, d in zip(vector, self.moduli))

    def multiply(self, a, b):
        return self._reduce([x + y for x, y in zip(a, b)])

    def inverse(self, a):
        return self._reduce([-x for x in a])

    def canonical(self, data):
        if isinstance(data, int) and not isinstance(data, bool):
            data = [data]
        if not isinstance(data, (list, tuple)) or len(data) != len(self.moduli):
            raise GroupFormatError(f"{data!r} is not a vector of length {len(self.moduli)}")
        if any(isinstance(value, bool) or not isinstance(value, int) for value in data):
            raise GroupFormatError(f"{data!r} has non-integer entries")
        return self._reduce(data)

    def elements(self):
        if not self.is_finite:
            return super().elements()
        return [tuple(vector) for vector in itertools.product(*(range(d) for d in self.moduli))]

    def describe(self):
        return {**super().describe(), "invariants": list(self.moduli)}

    @property
    def is_free_abelian(self) -> bool:
        return bool(self.moduli) and all(d == 0 for d in self.moduli)

    def pi1_orbit_formula(self, length):
        if self.is_free_abelian:
            xs = var_terms(tuple_vars(len(self.generators)))
            return And((relator_schema(self, self.generators, length), roots_schema(xs)))
        return None

    def orbit_formula_generates(self, length):
        # n root-free vectors of Z^n form a basis
        return self.is_free_abelian and length >= 1

    def certifies_root_free(self, values):
        # a unimodular basis leaves x̄^m̄ with content gcd(m̄), which is prime to n
        if not self.is_free_abelian or len(values) != len(self.moduli):
            return False
        return abs(Matrix([list(value) for value in values]).det()) == 1


class FreeGroup(GroupOracle):
    kind = "free"

    def __init__(self, rank: int, name: str = ""):
        if rank < 1:
            raise GroupFormatError("Free groups need rank at least 1")
        self.rank = rank
        super().__init__(tuple((i,) for i in range(1, rank + 1)), name=name)

    @property
    def identity(self):
        return ()

    def multiply(self, a, b):
        return free_reduce(a + b)

    def inverse(self, a):
        return inverse_word(a)

    def canonical(self, data):
        if not isinstance(data, (list, tuple)) or any(
            isinstance(letter, bool) or not isinstance(letter, int) or not 1 <= abs(letter) <= self.rank for letter in data
        ):
            raise GroupFormatError(f"{data!r} is not a word over {self.rank} generators")
        return free_reduce(data)

    def describe(self):
        return {**super().describe(), "rank": self.rank}


class InfiniteDihedralGroup(GroupOracle):
    """Elements ``(k, e)`` read as ``a^k b^e``; ``a`` is the translation, ``b`` the reflection."""

    kind = "infinite-dihedral"

    def __init__(self, name: str = ""):
        super().__init__(((1, 0), (0, 1)), name=name)

    @property
    def identity(self):
        return (0, 0)

    def multiply(self, a, b):
        k1, e1 = a
        k2, e2 = b
        return (k1 - k2 if e1 else k1 + k2, e1 ^ e2)

    def inverse(self, a):
        k, e = a
        return (k, 1) if e else (-k, 0)

    def canonical(self, data):
        if (
            not isinstance(data, (list, tuple))
            or len(data) != 2
            or any(isinstance(value, bool) or not isinstance(value, int) for value in data)
            or data[1] not in (0, 1)
        ):
            raise GroupFormatError(f"{data!r} is not a pair [k, e] with e in {{0, 1}}")
        return (int(data[0]), int(data[1]))

    def pi1_orbit_formula(self, length):
        return And((relator_schema(self, self.generators, length), roots_schema(var_terms(("x1",)))))

    def orbit_formula_generates(self, length):
        # length 2 pins x1 to a translation and x2 to a reflection; no roots makes x1 = a^±1
        return length >= 2

    def certifies_root_free(self, values):
        return len(values) == 1 and values[0] in ((1, 0), (-1, 0))


# ---------------------------------------------------------------------------
# Group files
# ---------------------------------------------------------------------------


class GroupFile(BaseModel):
    kind: str
    name: str = ""
    table: Optional[List[List[int]]] = None
    generators: Optional[List[int]] = None
    invariants: Optional[List[int]] = None
    relations: Optional[List[List[int]]] = None
    rank: Optional[int] = Field(default=None, ge=1)


_KINDS: Dict[str, Callable[[GroupFile], GroupOracle]] = {}


def register_kind(kind: str):
    def decorator(builder: Callable[[GroupFile], GroupOracle]):
        _KINDS[kind] = builder
        return builder

    return decorator


@register_kind("finite-table")
def _finite_table(model: GroupFile) -> GroupOracle:
    if model.table is None:
        raise GroupFormatError("finite-table groups need a 'table'")
    return FiniteTableGroup(model.table, model.generators, name=model.name)


@register_kind("fg-abelian")
def _fg_abelian(model: GroupFile) -> GroupOracle:
    if (model.invariants is None) == (model.relations is None):
        raise GroupFormatError("fg-abelian groups need exactly one of 'invariants' or 'relations'")
    if model.relations is not None:
        return AbelianGroup.from_relations(model.relations, name=model.name)
    return AbelianGroup(model.invariants, name=model.name)


@register_kind("free")
def _free(model: GroupFile) -> GroupOracle:
    if model.rank is None:
        raise GroupFormatError("free groups need a 'rank'")
    return FreeGroup(model.rank, name=model.name)


@register_kind("infinite-dihedral")
def _infinite_dihedral(model: GroupFile) -> GroupOracle:
    return InfiniteDihedralGroup(name=model.name)


def build_oracle(description: Mapping[str, Any]) -> GroupOracle:
    try:
        model = GroupFile.model_validate(dict(description))
    except ValidationError as exc:
        raise GroupFormatError(f"Invalid group file: {exc}") from None
    try:
        builder = _KINDS[model.kind]
    except KeyError:
        raise GroupFormatError(f"Unsupported group kind: {model.kind}") from None
    return builder(model)


def parse_group(text: str) -> GroupOracle:
    try:
        description = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GroupFormatError(f"Invalid group file: {exc}") from None
    if not isinstance(description, dict):
        raise GroupFormatError("Group file must hold a JSON object")
    return build_oracle(description)


def load_group(path: Path) -> GroupOracle:
    return parse_group(Path(path).read_text(encoding="utf-8"))


def parse_tuple(oracle: GroupOracle, data: Sequence[Any]) -> Tuple[Element, ...]:
    return tuple(oracle.canonical(item) for item in data)


# ---------------------------------------------------------------------------
# Schema enumerators
# ---------------------------------------------------------------------------


def _natural(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 0


@register_enumerator
class WordsEnumerator(SchemaEnumerator):
    """Child ``i`` is ``w_i(x̄) = y`` for the i-th reduced word over x̄; never exhausted."""

    name = "words"

    def generate(self, params, args, index):
        k = params[0]
        if k == 0 and index > 0:
            return None
        return eq(word_term(word_at(k, index), args[:k]), args[k])

    def declared(self, params):
        return Classification.declared("Both", 0)

    def validate(self, params, args):
        if len(params) != 1 or not _natural(params[0]):
            raise ValueError("words takes the generator count k")
        if len(args) != params[0] + 1:
            raise ValueError("words takes k tuple terms followed by the target term")


@register_enumerator
class RelatorsEnumerator(SchemaEnumerator):
    """
    Child ``i`` is ``w(x̄) = e`` or ``w(x̄) ≠ e`` for the (i+1)-th reduced
    word w, as recorded by flag ``i``; the family ends after the words of
    length at most L.
    """

    name = "relators"

    def generate(self, params, args, index):
        k, _, flags = params
        if index >= len(flags):
            return None
        term = word_term(word_at(k, index + 1), args)
        return eq(term, Const(IDENTITY)) if flags[index] == "1" else neq(term, Const(IDENTITY))

    def declared(self, params):
        return Classification.declared("Both", 0)

    def validate(self, params, args):
        if len(params) != 3 or not _natural(params[0]) or not _natural(params[1]) or not isinstance(params[2], str):
            raise ValueError("relators takes (k L flags)")
        k, length, flags = params
        if len(flags) != count_reduced_words(k, length) - 1 or set(flags) - {"0", "1"}:
            raise ValueError(f"relators flags must be one 0/1 per non-empty word of length <= {length}")
        if len(args) != k:
            raise ValueError(f"relators takes {k} argument terms")


@register_enumerator
class RootsEnumerator(SchemaEnumerator):
    """Child ``i`` is ``(∀y) yⁿ ≠ x̄^m̄`` for the i-th pair with n ≥ 2 and gcd(n, m̄) = 1."""

    name = "roots"

    def generate(self, params, args, index):
        n, exponents = root_pair_at(len(args), index)
        taken = set().union(*(term_vars(arg) for arg in args))
        y = fresh_name("y", taken)
        return Forall((y,), neq(word_term(power_word(1, n), (Var(y),)), word_term(monomial_word(exponents), args)))

    def declared(self, params):
        return Classification.declared("Pi", 1)

    def validate(self, params, args):
        if params:
            raise ValueError("roots takes no parameters")
        if not args:
            raise ValueError("roots takes at least one argument term")


def relator_flags(oracle: GroupOracle, tup: Sequence[Element], length: int) -> str:
    words = itertools.islice(reduced_words(len(tup), length), 1, None)
    return "".join("1" if oracle.evaluate_word(word, tup) == oracle.identity else "0" for word in words)


def relator_schema(oracle: GroupOracle, tup: Sequence[Element], length: int) -> Formula:
    """Bounded ``⟨x̄⟩ ≅ ⟨ā⟩``: every word of length ≤ L is a relator at x̄ exactly when it is one at ā."""
    if length < 1:
        raise PreconditionError("Relator schemas need length at least 1")
    k = len(tup)
    flags = relator_flags(oracle, tup, length)
    return And(Schema("relators", (k, length, flags), var_terms(tuple_vars(k)), bound=len(flags)))


def roots_schema(terms: Sequence) -> Formula:
    return And(Schema("roots", (), tuple(terms)))


def generation_clause(names: Sequence[str]) -> Formula:
    """``(∀y) ⋁_w w(x̄) = y``."""
    y = fresh_name("y", names)
    return Forall((y,), Or(Schema("words", (len(names),), var_terms(names) + (Var(y),))))


def _first_schema(formula: Formula, enumerator: str) -> Optional[Schema]:
    if isinstance(formula, (Forall, Exists)):
        return _first_schema(formula.body, enumerator)
    if isinstance(formula, (And, Or)):
        if isinstance(formula.children, Schema):
            return formula.children if formula.children.enumerator == enumerator else None
        for child in formula.children:
            found = _first_schema(child, enumerator)
            if found is not None:
                return found
    return None


# ---------------------------------------------------------------------------
# Ball semantics
# ---------------------------------------------------------------------------


class GroupBall(Universe):
    def __init__(self, oracle: GroupOracle, radius: int):
        self.oracle = oracle
        self.radius = radius
        self.complete = oracle.is_finite
        self._elements = oracle.elements() if oracle.is_finite else oracle.ball(radius)
        self._orbit_sentences: Dict[int, Formula] = {}

    def elements(self):
        return self._elements

    def holds(self, relation, values):
        raise SignatureMismatchError(f"Groups carry no relation {relation}")

    def apply(self, function, values):
        check_arity(GROUP_SIGNATURE.function_arity, function, values, "function")
        if function == MULTIPLY:
            return self.oracle.multiply(*values)
        return self.oracle.inverse(values[0])

    def constant(self, name):
        if name != IDENTITY:
            raise SignatureMismatchError(f"Groups carry no constant {name}")
        return self.oracle.identity

    def schema_verdict(self, formula, env, evaluator):
        schema = formula.children
        if schema.enumerator == "relators":
            positive = isinstance(formula, And) and not schema.negated
            if not positive and not (isinstance(formula, Or) and schema.negated):
                return None
            k, _, flags = schema.params
            values = tuple(evaluator.term_value(arg, env) for arg in schema.args)
            limit = len(flags) if schema.bound is None else min(schema.bound, len(flags))
            truth = all(
                (self.oracle.evaluate_word(word_at(k, index + 1), values) == self.oracle.identity) == (flags[index] == "1")
                for index in range(limit)
            )
            return Verdict3.of(truth == positive)
        if schema.enumerator == "words" and schema.bound is None:
            positive = isinstance(formula, Or) and not schema.negated
            if not positive and not (isinstance(formula, And) and schema.negated):
                return None
            k = schema.params[0]
            values = tuple(evaluator.term_value(arg, env) for arg in schema.args[:k])
            target = evaluator.term_value(schema.args[k], env)
            if target in self.oracle.reach(values, evaluator.budget):
                verdict = Verdict3.TRUE
            elif evaluator.complete:
                verdict = Verdict3.FALSE
            else:
                verdict = Verdict3.UNKNOWN
            return verdict if positive else verdict.negate()
        if schema.enumerator == "roots" and schema.bound is None:
            positive = isinstance(formula, And) and not schema.negated
            if not positive and not (isinstance(formula, Or) and schema.negated):
                return None
            values = tuple(evaluator.term_value(arg, env) for arg in schema.args)
            if not self.oracle.certifies_root_free(values):
                return None
            return Verdict3.TRUE if positive else Verdict3.FALSE
        return None

    def quantifier_verdict(self, formula, env, evaluator):
        verdict = self._generation_verdict(formula, env, evaluator)
        if verdict is None:
            verdict = self._orbit_sentence_verdict(formula)
        return verdict

    def _orbit_sentence_verdict(self, formula):
        """Certificate for ``(∀x̄)[φ(x̄) → (∀y) ⋁_w w(x̄) = y]`` with φ the oracle's own orbit formula."""
        names = tuple_vars(len(self.oracle.generators))
        if formula.vars != names:
            return None
        schema = _first_schema(formula.body, "relators")
        if schema is None:
            return None
        length = schema.params[1]
        if not self.oracle.orbit_formula_generates(length):
            return None
        if length not in self._orbit_sentences:
            phi = self.oracle.pi1_orbit_formula(length)
            self._orbit_sentences[length] = forall(names, implication(phi, generation_clause(names)))
        sentence = self._orbit_sentences[length]
        if formula == sentence:
            return Verdict3.TRUE
        if formula == negate(sentence):
            return Verdict3.FALSE
        return None

    def _generation_verdict(self, formula, env, evaluator):
        """Generation certificate for ``(∀y) ⋁_w w(x̄) = y`` and its dual."""
        if len(formula.vars) != 1 or not isinstance(formula.body, (And, Or)):
            return None
        schema = formula.body.children
        if not isinstance(schema, Schema) or schema.enumerator != "words" or schema.bound is not None:
            return None
        universal = isinstance(formula, Forall) and isinstance(formula.body, Or) and not schema.negated
        dual = isinstance(formula, Exists) and isinstance(formula.body, And) and schema.negated
        if not (universal or dual):
            return None
        k = schema.params[0]
        y = formula.vars[0]
        if schema.args[k] != Var(y) or any(y in term_vars(arg) for arg in schema.args[:k]):
            return None
        values = tuple(evaluator.term_value(arg, env) for arg in schema.args[:k])
        if not self.oracle.generates(values, evaluator.budget):
            return None
        return Verdict3.TRUE if universal else Verdict3.FALSE


@dataclass(frozen=True)
class GroupVerdict:
    value: Verdict3
    radius: int
    length: int

    @property
    def determinate(self) -> bool:
        return self.value.is_determinate

    def __str__(self) -> str:
        if self.value is Verdict3.UNKNOWN:
            return f"UnknownAtBound(radius={self.radius}, length={self.length})"
        return self.value.value


def tuple_assignment(tup: Sequence[Element]) -> Dict[str, Element]:
    return dict(zip(tuple_vars(len(tup)), tup))


def bounded_model_check(
    oracle: GroupOracle,
    formula: Formula,
    radius: int,
    budget: int = 64,
    valuation: Optional[Mapping[str, Element]] = None,
) -> GroupVerdict:
    """Sound three-valued verdict over the ball of ``radius`` with schemas cut at ``budget``."""
    value = Evaluator(GroupBall(oracle, radius), budget=budget).evaluate(formula, valuation)
    return GroupVerdict(value, radius, budget)


def ball_check(
    oracle: GroupOracle,
    formula: Formula,
    radius: int,
    budget: int = 64,
    valuation: Optional[Mapping[str, Element]] = None,
) -> Verdict3:
    """Two-valued verdict treating the ball and the schema prefixes as everything there is."""
    return Evaluator(GroupBall(oracle, radius), budget=budget, relativize=True).evaluate(formula, valuation)


# ---------------------------------------------------------------------------
# Scott sentences
# ---------------------------------------------------------------------------


def sigma3_scott(oracle: GroupOracle, length: int) -> Formula:
    """``(∃x̄)[⟨x̄⟩ ≅ ⟨ā⟩ ∧ (∀y) ⋁_w w(x̄) = y]`` for the generating tuple ā."""
    names = tuple_vars(len(oracle.generators))
    return Exists(names, And((relator_schema(oracle, oracle.generators, length), generation_clause(names))))


def ho_d_sigma2(
    oracle: GroupOracle,
    phi: Formula,
    length: int,
    radius: int = DEFAULT_RADIUS,
    budget: int = 64,
) -> Formula:
    """
    d-Σ₂ Scott sentence from a formula φ(x̄) true of the generating tuple:
    ``(∃x̄)[φ(x̄) ∧ ⟨x̄⟩ ≅ ⟨ā⟩] ∧ (∀x̄)[φ(x̄) → (∀y) ⋁_w w(x̄) = y]``.

    That every tuple satisfying φ generates the group is the caller's claim;
    only φ(ā) is checked, and only a determinate False rejects it.
    """
    names = tuple_vars(len(oracle.generators))
    stray = sorted(free_vars(phi) - set(names))
    if stray:
        raise PreconditionError(f"Formula has free variables outside {list(names)}: {stray}")
    home = bounded_model_check(oracle, phi, radius, budget, tuple_assignment(oracle.generators))
    if home.value is Verdict3.FALSE:
        raise PreconditionError(f"Formula is false at the generating tuple ({home})")
    logger.info("Formula at the generating tuple of %s: %s", oracle.name, home)
    sigma_part = exists(names, And((phi, relator_schema(oracle, oracle.generators, length))))
    pi_part = forall(names, implication(phi, generation_clause(names)))
    return And((sigma_part, pi_part))


def extract_pi1_orbit(
    oracle: GroupOracle,
    sigma2: Formula,
    tup: Sequence[Element],
    radius: int,
    budget: int = 64,
) -> Formula:
    """
    Turn a Σ₂ definition ``⋁_i (∃ū_i) φ_i(x̄, ū_i)`` of the orbit of ā into the
    Π₁ formula ``φ_i(x̄, w̄(x̄))``, where b̄ = w̄(ā) is the first witness found in
    the ball.
    """
    tup = tuple(tup)
    names = tuple_vars(len(tup))
    base = tuple_assignment(tup)
    universe = GroupBall(oracle, radius)
    sound = Evaluator(universe, budget=budget)
    relativized = Evaluator(universe, budget=budget, relativize=True)
    for index, (bound, body) in enumerate(sigma_disjuncts(sigma2)):
        for values in itertools.product(universe.elements(), repeat=len(bound)):
            valuation = {**base, **dict(zip(bound, values))}
            if sound.evaluate(body, valuation) is Verdict3.FALSE:
                continue
            if relativized.evaluate(body, valuation) is not Verdict3.TRUE:
                continue
            words = [oracle.express(value, tup) for value in values]
            if any(word is None for word in words):
                raise ExtractionFailure(
                    f"Witness {[oracle.to_data(v) for v in values]} is not reached by words in the tuple",
                    radius_hint=radius,
                )
            logger.info(
                "Disjunct %s witnessed by %s", index, [format_word(word, names) for word in words]
            )
            assignment = {name: word_term(word, var_terms(names)) for name, word in zip(bound, words)}
            return substitute(body, assignment)
    raise ExtractionFailure(f"No witness for any disjunct in the radius-{radius} ball", radius_hint=radius + 1)


# ---------------------------------------------------------------------------
# Self-reflectivity search
# ---------------------------------------------------------------------------

REJECTION_COLUMNS = ["candidate", "stage", "reason"]


@dataclass
class SelfReflectiveResult:
    verdict: str
    witness: Optional[Tuple[Element, ...]]
    radius: int
    length: int
    candidates: int
    rejections: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=REJECTION_COLUMNS))
    note: str = ""

    def rejection_of(self, candidate: Sequence[Any]) -> Optional[Dict[str, str]]:
        rows = self.rejections[self.rejections["candidate"] == json.dumps(list(candidate))]
        return None if rows.empty else rows.iloc[0].to_dict()

    def to_text(self) -> str:
        lines = [
            f"verdict: {self.verdict}" + (f" {json.dumps(list(self.witness))}" if self.witness is not None else ""),
            f"bounds: radius={self.radius} length={self.length} candidates={self.candidates}",
            "existential battery: one quantifier, words of length <= length; a NoneUpToBound verdict is evidence only",
        ]
        if self.note:
            lines.append(f"note: {self.note}")
        for row in self.rejections.itertuples(index=False):
            lines.append(f"  {row.candidate} rejected at {row.stage}: {row.reason}")
        return "\n".join(lines) + "\n"


def _battery(k: int, length: int) -> Iterator[Tuple[Word, List[Word]]]:
    """Words u over (y, x̄) containing y, each with the words v over x̄ it is compared against."""
    targets = list(reduced_words(k, length))
    for u in reduced_words(k + 1, length):
        if any(abs(letter) == 1 for letter in u):
            yield u, targets


def _battery_item(u: Word, v: Word, equal: bool, k: int) -> Formula:
    xs = var_terms(tuple_vars(k))
    left = word_term(u, (Var("y"),) + xs)
    right = word_term(v, xs)
    return Exists(("y",), eq(left, right) if equal else neq(left, right))


def _battery_failure(
    oracle: GroupOracle, candidate: Tuple[Element, ...], inner: Sequence[Element], radius: int, length: int
) -> Optional[Formula]:
    k = len(candidate)
    outer = oracle.ball(radius)
    for u, targets in _battery(k, length):
        outer_values = {oracle.evaluate_word(u, (y,) + candidate) for y in outer}
        inner_values = {oracle.evaluate_word(u, (y,) + candidate) for y in inner}
        for v in targets:
            target = oracle.evaluate_word(v, candidate)
            if target in outer_values and target not in inner_values:
                return _battery_item(u, v, True, k)
            if outer_values - {target} and not inner_values - {target}:
                return _battery_item(u, v, False, k)
    return None


def self_reflective_search(
    oracle: GroupOracle,
    tup: Optional[Sequence[Element]] = None,
    radius: int = DEFAULT_RADIUS,
    length: int = DEFAULT_LENGTH,
) -> SelfReflectiveResult:
    """
    Look for b̄ in the ball with the bounded relators of ā, not generating the
    group within ``radius``, and passing the existential battery inside the
    subgroup ball it generates. The least such b̄ is returned as a witness.
    """
    tup = tuple(oracle.generators if tup is None else tup)
    if oracle.is_finite:
        return SelfReflectiveResult(
            "NoneUpToBound",
            None,
            radius,
            length,
            0,
            note="finite group: a proper subgroup is smaller, so no tuple in it is an isomorphic copy",
        )
    home = relator_flags(oracle, tup, length)
    rows: List[Dict[str, str]] = []
    count = 0
    for candidate in itertools.product(oracle.ball(radius), repeat=len(tup)):
        count += 1
        label = json.dumps([oracle.to_data(value) for value in candidate])
        if relator_flags(oracle, candidate, length) != home:
            rows.append({"candidate": label, "stage": "relators", "reason": f"relators differ up to length {length}"})
            continue
        inner = oracle.subgroup_ball(candidate, radius)
        if set(oracle.generators) <= set(inner):
            rows.append({"candidate": label, "stage": "generation", "reason": f"generates the group within radius {radius}"})
            continue
        failure = _battery_failure(oracle, candidate, inner, radius, length)
        if failure is not None:
            logger.debug("Candidate %s fails %s", label, format_formula(failure))
            rows.append({"candidate": label, "stage": "battery", "reason": f"{format_formula(failure)} holds in G but not in the subgroup ball"})
            continue
        logger.info("Self-reflectivity witness %s (radius=%s, length=%s)", label, radius, length)
        return SelfReflectiveResult("Witness", tuple(oracle.to_data(v) for v in candidate), radius, length, count, pd.DataFrame(rows, columns=REJECTION_COLUMNS))
    logger.info("No self-reflectivity witness among %s candidates (radius=%s, length=%s)", count, radius, length)
    return SelfReflectiveResult("NoneUpToBound", None, radius, length, count, pd.DataFrame(rows, columns=REJECTION_COLUMNS))
