"""
Complexity classification
-------------------------

Every formula gets a pair of ranks ``(sigma, pi)``: the least α for which its
shape is Σ_α, and likewise for Π_α. Conjunctions and universal blocks are
Π-shaped, disjunctions and existential blocks are Σ-shaped, and a connective
with exactly one quantified child takes that child's ranks (quantifier-free
side conditions never raise a rank). Schemas contribute the class their
enumerator declares for its children.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Tuple, Union

from .ordinals import Ordinal
from .syntax import And, Atom, Exists, Forall, Formula, Or, Schema

ZERO = Ordinal()
ONE = Ordinal.of(1)


class Side(str, Enum):
    SIGMA = "Sigma"
    PI = "Pi"
    BOTH = "Both"

    def dual(self) -> "Side":
        if self is Side.SIGMA:
            return Side.PI
        if self is Side.PI:
            return Side.SIGMA
        return self


@dataclass(frozen=True)
class Classification:
    side: Side
    rank: Ordinal

    def __str__(self) -> str:
        return f"({self.side.value}, {self.rank})"

    def dual(self) -> "Classification":
        return Classification(self.side.dual(), self.rank)

    def ranks(self) -> Tuple[Ordinal, Ordinal]:
        if self.side is Side.SIGMA:
            return self.rank, self.rank.successor()
        if self.side is Side.PI:
            return self.rank.successor(), self.rank
        return self.rank, self.rank

    @classmethod
    def declared(cls, side: Union[str, Side], rank: Union[int, Ordinal]) -> "Classification":
        return cls(Side(side), Ordinal.of(rank))


def _max(values) -> Ordinal:
    best = ZERO
    for value in values:
        if value > best:
            best = value
    return best


def _min(a: Ordinal, b: Ordinal) -> Ordinal:
    return a if a < b else b


def _schema_ranks(schema: Schema) -> Tuple[Ordinal, Ordinal]:
    from .schemas import get_enumerator

    declared = get_enumerator(schema.enumerator).declared(schema.params)
    sigma, pi = declared.ranks()
    return (pi, sigma) if schema.negated else (sigma, pi)


def ranks(formula: Formula) -> Tuple[Ordinal, Ordinal]:
    if isinstance(formula, Atom):
        return ZERO, ZERO

    if isinstance(formula, (And, Or)):
        disjunctive = isinstance(formula, Or)
        if isinstance(formula.children, Schema):
            sigma, pi = _schema_ranks(formula.children)
            if disjunctive:
                top = _max([ONE, sigma])
                return top, top.successor()
            top = _max([ONE, pi])
            return top.successor(), top

        child_ranks = [ranks(child) for child in formula.children]
        loose = [pair for pair in child_ranks if pair != (ZERO, ZERO)]
        if not loose:
            return ZERO, ZERO
        if len(loose) == 1:
            return loose[0]
        if disjunctive:
            top = _max(sigma for sigma, _ in loose)
            return top, top.successor()
        top = _max(pi for _, pi in loose)
        return top.successor(), top

    body_sigma, body_pi = ranks(formula.body)
    if not formula.vars:
        return body_sigma, body_pi
    if isinstance(formula, Exists):
        sigma = _min(_max([ONE, body_sigma]), body_pi.successor())
        return sigma, sigma.successor()
    pi = _min(_max([ONE, body_pi]), body_sigma.successor())
    return pi.successor(), pi


def classify(formula: Formula) -> Classification:
    sigma, pi = ranks(formula)
    if sigma == pi:
        return Classification(Side.BOTH, sigma)
    if sigma < pi:
        return Classification(Side.SIGMA, sigma)
    return Classification(Side.PI, pi)


def sigma_rank(formula: Formula) -> Ordinal:
    return ranks(formula)[0]


def pi_rank(formula: Formula) -> Ordinal:
    return ranks(formula)[1]


def is_sigma(formula: Formula, alpha: Union[int, Ordinal]) -> bool:
    return not Ordinal.of(alpha) < sigma_rank(formula)


def is_pi(formula: Formula, alpha: Union[int, Ordinal]) -> bool:
    return not Ordinal.of(alpha) < pi_rank(formula)


def is_d_sigma(formula: Formula, alpha: Union[int, Ordinal]) -> bool:
    """A binary conjunction of a Σ_α formula and a Π_α formula, in either order."""
    if not isinstance(formula, And) or isinstance(formula.children, Schema):
        return False
    if len(formula.children) != 2:
        return False
    first, second = formula.children
    return (is_sigma(first, alpha) and is_pi(second, alpha)) or (
        is_sigma(second, alpha) and is_pi(first, alpha)
    )
