"""
Schema enumerators
------------------

A schema stands for a countable conjunction or disjunction whose children are
produced on demand by a deterministic enumerator. Enumerators are registered
by name; formulas only store the name, plain-data parameters and argument
terms, so printing and parsing never need to know how children are built.

Group-specific enumerators (``words``, ``relators``, ``roots``) register
themselves from ``groups.py``; they are loaded the first time an unknown
name is looked up.
"""

from __future__ import annotations

import logging
from typing import Any, Dict, Optional, Tuple, Type

from .complexity import Classification
from .syntax import Atom, Formula, Term

logger = logging.getLogger(__name__)


class SchemaEnumerator:
    """Base enumerator: subclasses implement ``generate`` and ``declared``."""

    name = ""

    def generate(self, params: Tuple[Any, ...], args: Tuple[Term, ...], index: int) -> Optional[Formula]:
        raise NotImplementedError

    def declared(self, params: Tuple[Any, ...]) -> Classification:
        raise NotImplementedError

    def validate(self, params: Tuple[Any, ...], args: Tuple[Term, ...]) -> None:
        """Raise ``ValueError`` when params or args cannot drive this enumerator."""


_REGISTRY: Dict[str, SchemaEnumerator] = {}
_BUILTINS_LOADED = False


def register_enumerator(cls: Type[SchemaEnumerator]) -> Type[SchemaEnumerator]:
    _REGISTRY[cls.name] = cls()
    return cls


def _load_builtins() -> None:
    global _BUILTINS_LOADED
    if _BUILTINS_LOADED:
        return
    _BUILTINS_LOADED = True
    from . import groups  # noqa: F401  registers the group enumerators


def get_enumerator(name: str) -> SchemaEnumerator:
    if name not in _REGISTRY:
        _load_builtins()
    try:
        return _REGISTRY[name]
    except KeyError:
        raise ValueError(f"Unsupported schema enumerator: {name}") from None


def registered_enumerators() -> Tuple[str, ...]:
    _load_builtins()
    return tuple(sorted(_REGISTRY))


@register_enumerator
class LadderEnumerator(SchemaEnumerator):
    """Child ``i`` is the atom ``{prefix}{i}(x)``; never exhausted."""

    name = "ladder"

    def generate(self, params, args, index):
        prefix = params[0] if params else "U"
        return Atom(f"{prefix}{index}", tuple(args))

    def declared(self, params):
        return Classification.declared("Both", 0)

    def validate(self, params, args):
        if len(params) > 1 or (params and not isinstance(params[0], str)):
            raise ValueError("ladder takes a single relation prefix")
        if len(args) != 1:
            raise ValueError("ladder takes exactly one argument term")


