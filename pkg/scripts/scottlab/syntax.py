"""
Normal-form infinitary formulas
-------------------------------

Immutable ASTs for terms and formulas. Negation only ever sits on atoms;
``And``/``Or`` take either an explicit tuple of children or a ``Schema``, a
finitely coded countable family produced by a registered enumerator (see
``schemas.py``). The empty ``And`` is true and the empty ``Or`` is false.

Besides the node types this module carries the structural operations every
other module leans on: negation, free-variable bookkeeping, capture-avoiding
substitution, and the ``implication`` builder that keeps "γ → θ" in normal
form.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, replace
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from .errors import UnboundVariableError

EQUALITY = "="


# ---------------------------------------------------------------------------
# Signatures and terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Signature:
    relations: Tuple[Tuple[str, int], ...] = ()
    functions: Tuple[Tuple[str, int], ...] = ()
    constants: Tuple[str, ...] = ()

    @classmethod
    def build(
        cls,
        relations: Optional[Mapping[str, int]] = None,
        functions: Optional[Mapping[str, int]] = None,
        constants: Iterable[str] = (),
    ) -> "Signature":
        return cls(
            relations=tuple(sorted((relations or {}).items())),
            functions=tuple(sorted((functions or {}).items())),
            constants=tuple(sorted(constants)),
        )

    @property
    def relation_arity(self) -> Dict[str, int]:
        return dict(self.relations)

    @property
    def function_arity(self) -> Dict[str, int]:
        return dict(self.functions)

    def restrict(self, relations: Iterable[str]) -> "Signature":
        keep = set(relations)
        return replace(self, relations=tuple(item for item in self.relations if item[0] in keep))


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Henkin:
    index: int


@dataclass(frozen=True)
class App:
    func: str
    args: Tuple["Term", ...]


Term = Union[Var, Const, Henkin, App]


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Schema:
    """
    Countable family ``child(0), child(1), ...`` generated by a registered
    enumerator from plain-data ``params`` and argument terms ``args``.

    ``bound`` caps the index range; ``negated`` negates every child, which is
    how ``negate`` maps schemas elementwise.
    """

    enumerator: str
    params: Tuple[Any, ...] = ()
    args: Tuple[Term, ...] = ()
    bound: Optional[int] = None
    negated: bool = False

    def child(self, index: int) -> Optional["Formula"]:
        if self.bound is not None and index >= self.bound:
            return None
        from .schemas import get_enumerator

        formula = get_enumerator(self.enumerator).generate(self.params, self.args, index)
        if formula is None:
            return None
        return negate(formula) if self.negated else formula

    def expand(self, limit: int) -> Tuple[List["Formula"], bool]:
        """Children with index below ``limit`` and whether the family ended."""
        children: List[Formula] = []
        for index in range(limit):
            child = self.child(index)
            if child is None:
                return children, True
            children.append(child)
        return children, self.child(limit) is None

    def toggled(self) -> "Schema":
        return replace(self, negated=not self.negated)


@dataclass(frozen=True)
class Atom:
    rel: str
    args: Tuple[Term, ...]
    positive: bool = True


@dataclass(frozen=True)
class And:
    children: Union[Tuple["Formula", ...], Schema] = ()


@dataclass(frozen=True)
class Or:
    children: Union[Tuple["Formula", ...], Schema] = ()


@dataclass(frozen=True)
class Forall:
    vars: Tuple[str, ...]
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    vars: Tuple[str, ...]
    body: "Formula"


Formula = Union[Atom, And, Or, Forall, Exists]

TOP = And(())
BOTTOM = Or(())


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def var_terms(names: Sequence[str]) -> Tuple[Term, ...]:
    return tuple(Var(name) for name in names)


def tuple_vars(k: int) -> Tuple[str, ...]:
    """Free variables ``x1..xk`` of a formula about k-tuples."""
    return tuple(f"x{i}" for i in range(1, k + 1))


def eq(left: Term, right: Term) -> Atom:
    return Atom(EQUALITY, (left, right))


def neq(left: Term, right: Term) -> Atom:
    return Atom(EQUALITY, (left, right), positive=False)


def conj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else And(parts)


def disj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    return parts[0] if len(parts) == 1 else Or(parts)


def forall(names: Sequence[str], body: Formula) -> Formula:
    names = tuple(names)
    return Forall(names, body) if names else body


def exists(names: Sequence[str], body: Formula) -> Formula:
    names = tuple(names)
    return Exists(names, body) if names else body


def distinct(terms: Sequence[Term]) -> List[Atom]:
    return [neq(a, b) for a, b in itertools.combinations(terms, 2)]


def counting_exists(count: int, name: str, body: Formula) -> Formula:
    """``(∃^{≥count} name) body`` as ``count`` existentials plus pairwise inequalities."""
    if count <= 0:
        return TOP
    avoid = set(free_vars(body))
    names: List[str] = []
    for _ in range(count):
        fresh = fresh_name(name, avoid)
        avoid.add(fresh)
        names.append(fresh)
    instances = [substitute(body, {name: Var(fresh)}) for fresh in names]
    return exists(names, conj(distinct(var_terms(names)) + instances))


# ---------------------------------------------------------------------------
# Structural operations
# ---------------------------------------------------------------------------


def negate(formula: Formula) -> Formula:
    if isinstance(formula, Atom):
        return replace(formula, positive=not formula.positive)
    if isinstance(formula, (And, Or)):
        dual = Or if isinstance(formula, And) else And
        if isinstance(formula.children, Schema):
            return dual(formula.children.toggled())
        return dual(tuple(negate(child) for child in formula.children))
    if isinstance(formula, Forall):
        return Exists(formula.vars, negate(formula.body))
    if isinstance(formula, Exists):
        return Forall(formula.vars, negate(formula.body))
    raise TypeError(f"Not a formula: {formula!r}")


def term_vars(term: Term) -> Set[str]:
    if isinstance(term, Var):
        return {term.name}
    if isinstance(term, App):
        found: Set[str] = set()
        for arg in term.args:
            found |= term_vars(arg)
        return found
    return set()


def term_henkins(term: Term) -> Set[int]:
    if isinstance(term, Henkin):
        return {term.index}
    if isinstance(term, App):
        found: Set[int] = set()
        for arg in term.args:
            found |= term_henkins(arg)
        return found
    return set()


def free_vars(formula: Formula) -> FrozenSet[str]:
    if isinstance(formula, Atom):
        found: Set[str] = set()
        for arg in formula.args:
            found |= term_vars(arg)
        return frozenset(found)
    if isinstance(formula, (And, Or)):
        if isinstance(formula.children, Schema):
            found = set()
            for arg in formula.children.args:
                found |= term_vars(arg)
            return frozenset(found)
        return frozenset().union(*(free_vars(child) for child in formula.children))
    return free_vars(formula.body) - set(formula.vars)


def henkin_constants(formula: Formula) -> FrozenSet[int]:
    if isinstance(formula, Atom):
        found: Set[int] = set()
        for arg in formula.args:
            found |= term_henkins(arg)
        return frozenset(found)
    if isinstance(formula, (And, Or)):
        if isinstance(formula.children, Schema):
            found = set()
            for arg in formula.children.args:
                found |= term_henkins(arg)
            return frozenset(found)
        return frozenset().union(*(henkin_constants(child) for child in formula.children))
    return henkin_constants(formula.body)


def bound_names(formula: Formula) -> Set[str]:
    if isinstance(formula, Atom):
        return set()
    if isinstance(formula, (And, Or)):
        if isinstance(formula.children, Schema):
            return set()
        found: Set[str] = set()
        for child in formula.children:
            found |= bound_names(child)
        return found
    return set(formula.vars) | bound_names(formula.body)


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    if base not in avoid:
        return base
    stem = re.sub(r"\d+$", "", base) or "v"
    for number in itertools.count(1):
        candidate = f"{stem}{number}"
        if candidate not in avoid:
            return candidate
    raise AssertionError("unreachable")


def substitute_term(term: Term, assignment: Mapping[str, Term]) -> Term:
    if isinstance(term, Var):
        return assignment.get(term.name, term)
    if isinstance(term, App):
        return App(term.func, tuple(substitute_term(arg, assignment) for arg in term.args))
    return term


def substitute(formula: Formula, assignment: Mapping[str, Term], *, sentence: bool = False) -> Formula:
    """Capture-avoiding replacement of free variables by terms."""
    result = _substitute(formula, dict(assignment)) if assignment else formula
    if sentence:
        remaining = free_vars(result)
        if remaining:
            raise UnboundVariableError(f"Unbound variables remain: {', '.join(sorted(remaining))}")
    return result


def _substitute(formula: Formula, assignment: Dict[str, Term]) -> Formula:
    if isinstance(formula, Atom):
        return replace(formula, args=tuple(substitute_term(arg, assignment) for arg in formula.args))
    if isinstance(formula, (And, Or)):
        if isinstance(formula.children, Schema):
            schema = formula.children
            args = tuple(substitute_term(arg, assignment) for arg in schema.args)
            return type(formula)(replace(schema, args=args))
        return type(formula)(tuple(_substitute(child, assignment) for child in formula.children))

    inner = {name: term for name, term in assignment.items() if name not in formula.vars}
    body_free = free_vars(formula.body)
    inner = {name: term for name, term in inner.items() if name in body_free}
    if not inner:
        return formula
    incoming: Set[str] = set()
    for term in inner.values():
        incoming |= term_vars(term)
    names = list(formula.vars)
    avoid = incoming | body_free | set(names)
    for position, name in enumerate(names):
        if name in incoming:
            fresh = fresh_name(name, avoid)
            avoid.add(fresh)
            inner[name] = Var(fresh)
            names[position] = fresh
    return type(formula)(tuple(names), _substitute(formula.body, inner))


def rename_bound(names: Sequence[str], body: Formula, avoid: Iterable[str]) -> Tuple[Tuple[str, ...], Formula]:
    """Rename the block ``names`` bound over ``body`` away from ``avoid``."""
    avoid = set(avoid)
    taken = avoid | set(free_vars(body)) | set(names)
    mapping: Dict[str, Term] = {}
    renamed: List[str] = []
    for name in names:
        if name in avoid:
            fresh = fresh_name(name, taken)
            taken.add(fresh)
            mapping[name] = Var(fresh)
            renamed.append(fresh)
        else:
            renamed.append(name)
    if not mapping:
        return tuple(names), body
    return tuple(renamed), substitute(body, mapping)


# ---------------------------------------------------------------------------
# Normal-form views
# ---------------------------------------------------------------------------


def is_quantifier_free(formula: Formula) -> bool:
    if isinstance(formula, Atom):
        return True
    if isinstance(formula, (And, Or)):
        if isinstance(formula.children, Schema):
            return False
        return all(is_quantifier_free(child) for child in formula.children)
    return False


def sigma_disjuncts(formula: Formula) -> List[Tuple[Tuple[str, ...], Formula]]:
    """Read ``formula`` as ``⋁_k (∃ȳ_k) ψ_k`` over explicit lists."""
    if isinstance(formula, Or) and not isinstance(formula.children, Schema):
        parts: List[Tuple[Tuple[str, ...], Formula]] = []
        for child in formula.children:
            parts.extend(sigma_disjuncts(child))
        return parts
    if isinstance(formula, Exists):
        parts = []
        for names, body in sigma_disjuncts(formula.body):
            parts.append((formula.vars + names, body))
        return parts
    if isinstance(formula, And) and not isinstance(formula.children, Schema):
        loose = [child for child in formula.children if not is_quantifier_free(child)]
        if len(loose) == 1:
            fixed = [child for child in formula.children if child is not loose[0]]
            avoid = set().union(*(free_vars(child) for child in fixed)) if fixed else set()
            parts = []
            for names, body in sigma_disjuncts(loose[0]):
                names, body = rename_bound(names, body, avoid)
                parts.append((names, conj(fixed + [body])))
            return parts
    return [((), formula)]


def pi_conjuncts(formula: Formula) -> List[Tuple[Tuple[str, ...], Formula]]:
    """Read ``formula`` as ``⋀_j (∀w̄_j) χ_j`` over explicit lists."""
    return [(names, negate(body)) for names, body in sigma_disjuncts(negate(formula))]


def implication(antecedent: Formula, consequent: Formula) -> Formula:
    """Normal form of ``antecedent → consequent``: ⋀_{k,j} (∀ȳ_k w̄_j)(neg ψ_k ∨ χ_j)."""
    parts: List[Formula] = []
    for left_names, left in sigma_disjuncts(antecedent):
        for right_names, right in pi_conjuncts(consequent):
            left_names_r, left_r = rename_bound(left_names, left, free_vars(right) | set(right_names))
            right_names_r, right_r = rename_bound(right_names, right, free_vars(left_r) | set(left_names_r))
            parts.append(forall(left_names_r + right_names_r, disj([negate(left_r), right_r])))
    return conj(parts)


def replace_henkins(formula: Formula, assignment: Mapping[int, Term]) -> Formula:
    """Replace Henkin constants by terms, renaming binders that would capture them."""
    incoming: Set[str] = set()
    for term in assignment.values():
        incoming |= term_vars(term)
    return _replace_henkins(formula, dict(assignment), incoming)


def _replace_henkin_term(term: Term, assignment: Mapping[int, Term]) -> Term:
    if isinstance(term, Henkin):
        return assignment.get(term.index, term)
    if isinstance(term, App):
        return App(term.func, tuple(_replace_henkin_term(arg, assignment) for arg in term.args))
    return term


def _replace_henkins(formula: Formula, assignment: Dict[int, Term], incoming: Set[str]) -> Formula:
    if isinstance(formula, Atom):
        return replace(formula, args=tuple(_replace_henkin_term(arg, assignment) for arg in formula.args))
    if isinstance(formula, (And, Or)):
        if isinstance(formula.children, Schema):
            schema = formula.children
            args = tuple(_replace_henkin_term(arg, assignment) for arg in schema.args)
            return type(formula)(replace(schema, args=args))
        return type(formula)(tuple(_replace_henkins(child, assignment, incoming) for child in formula.children))
    names, body = rename_bound(formula.vars, formula.body, incoming)
    return type(formula)(names, _replace_henkins(body, assignment, incoming))
