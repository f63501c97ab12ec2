"""
Three-valued evaluation
-----------------------

``Evaluator`` runs a formula over any ``Universe``: finite structures, group
balls, or the constant-labelled structures read off a Henkin chain. Finite
connectives are decided exactly. A schema is expanded up to ``budget``
children; when the family does not end inside the budget the verdict can only
be settled by a counterexample, otherwise it stays ``UNKNOWN``. Over an
incomplete universe (a ball in an infinite group) a universal that found no
counterexample and an existential that found no witness are also reported as
``UNKNOWN``.

With ``relativize=True`` the universe and the expanded schema prefix are taken
to be everything there is, which yields a two-valued verdict about the finite
surrogate itself.
"""

from __future__ import annotations

import itertools
from enum import Enum
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple

from .errors import ArityError, SignatureMismatchError, UnboundVariableError
from .syntax import EQUALITY, And, App, Atom, Const, Exists, Forall, Formula, Henkin, Or, Schema, Term, Var


class Verdict3(str, Enum):
    TRUE = "True"
    FALSE = "False"
    UNKNOWN = "Unknown"

    @classmethod
    def of(cls, value: bool) -> "Verdict3":
        return cls.TRUE if value else cls.FALSE

    def negate(self) -> "Verdict3":
        if self is Verdict3.TRUE:
            return Verdict3.FALSE
        if self is Verdict3.FALSE:
            return Verdict3.TRUE
        return self

    @property
    def is_determinate(self) -> bool:
        return self is not Verdict3.UNKNOWN


class Universe:
    """Interpretation interface the evaluator runs against."""

    complete = True

    def elements(self) -> Sequence[Any]:
        raise NotImplementedError

    def holds(self, relation: str, values: Tuple[Any, ...]) -> bool:
        raise NotImplementedError

    def apply(self, function: str, values: Tuple[Any, ...]) -> Any:
        raise NotImplementedError

    def constant(self, name: str) -> Any:
        raise NotImplementedError

    def schema_verdict(
        self, formula: Formula, env: Dict[str, Any], evaluator: "Evaluator"
    ) -> Optional[Verdict3]:
        return None

    def quantifier_verdict(
        self, formula: Formula, env: Dict[str, Any], evaluator: "Evaluator"
    ) -> Optional[Verdict3]:
        return None


class Evaluator:
    def __init__(
        self,
        universe: Universe,
        budget: int = 64,
        henkins: Optional[Mapping[int, Any]] = None,
        relativize: bool = False,
    ):
        self.universe = universe
        self.budget = budget
        self.henkins = dict(henkins or {})
        self.relativize = relativize

    @property
    def complete(self) -> bool:
        return self.relativize or self.universe.complete

    def evaluate(self, formula: Formula, valuation: Optional[Mapping[str, Any]] = None) -> Verdict3:
        return self._eval(formula, dict(valuation or {}))

    def term_value(self, term: Term, env: Dict[str, Any]) -> Any:
        if isinstance(term, Var):
            try:
                return env[term.name]
            except KeyError:
                raise UnboundVariableError(f"No value for variable {term.name}") from None
        if isinstance(term, Henkin):
            try:
                return self.henkins[term.index]
            except KeyError:
                raise UnboundVariableError(f"No value for Henkin constant ${term.index}") from None
        if isinstance(term, Const):
            return self.universe.constant(term.name)
        if isinstance(term, App):
            return self.universe.apply(term.func, tuple(self.term_value(arg, env) for arg in term.args))
        raise TypeError(f"Not a term: {term!r}")

    def _eval(self, formula: Formula, env: Dict[str, Any]) -> Verdict3:
        if isinstance(formula, Atom):
            values = tuple(self.term_value(arg, env) for arg in formula.args)
            if formula.rel == EQUALITY:
                if len(values) != 2:
                    raise ArityError(f"Equality takes 2 arguments, got {len(values)}")
                truth = values[0] == values[1]
            else:
                truth = self.universe.holds(formula.rel, values)
            return Verdict3.of(truth == formula.positive)

        if isinstance(formula, (And, Or)):
            return self._eval_connective(formula, env)

        hooked = self.universe.quantifier_verdict(formula, env, self)
        if hooked is not None:
            return hooked
        return self._eval_quantifier(formula, env)

    def _eval_connective(self, formula: Formula, env: Dict[str, Any]) -> Verdict3:
        conjunctive = isinstance(formula, And)
        stop = Verdict3.FALSE if conjunctive else Verdict3.TRUE
        exhausted = True
        if isinstance(formula.children, Schema):
            hooked = self.universe.schema_verdict(formula, env, self)
            if hooked is not None:
                return hooked
            children, exhausted = formula.children.expand(self.budget)
        else:
            children = formula.children

        undetermined = False
        for child in children:
            verdict = self._eval(child, env)
            if verdict is stop:
                return stop
            if verdict is Verdict3.UNKNOWN:
                undetermined = True
        if undetermined or not (exhausted or self.relativize):
            return Verdict3.UNKNOWN
        return stop.negate()

    def _eval_quantifier(self, formula: Formula, env: Dict[str, Any]) -> Verdict3:
        if not formula.vars:
            return self._eval(formula.body, env)
        universal = isinstance(formula, Forall)
        stop = Verdict3.FALSE if universal else Verdict3.TRUE
        saved = {name: env[name] for name in formula.vars if name in env}
        undetermined = False
        try:
            elements = self.universe.elements()
            for values in itertools.product(elements, repeat=len(formula.vars)):
                env.update(zip(formula.vars, values))
                verdict = self._eval(formula.body, env)
                if verdict is stop:
                    return stop
                if verdict is Verdict3.UNKNOWN:
                    undetermined = True
        finally:
            for name in formula.vars:
                env.pop(name, None)
            env.update(saved)
        if undetermined or not self.complete:
            return Verdict3.UNKNOWN
        return stop.negate()


def evaluate(
    universe: Universe,
    formula: Formula,
    valuation: Optional[Mapping[str, Any]] = None,
    budget: int = 64,
    henkins: Optional[Mapping[int, Any]] = None,
) -> Verdict3:
    return Evaluator(universe, budget=budget, henkins=henkins).evaluate(formula, valuation)


def check_arity(arity: Mapping[str, int], name: str, values: Tuple[Any, ...], kind: str) -> None:
    if name not in arity:
        raise SignatureMismatchError(f"Unknown {kind} symbol {name}")
    if arity[name] != len(values):
        raise ArityError(f"{kind.capitalize()} {name} has arity {arity[name]}, got {len(values)} arguments")
