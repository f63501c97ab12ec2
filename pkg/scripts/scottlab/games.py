"""
Back-and-forth games on finite structures.

Independent oracle for the back-and-forth checks in ``scott.py``: an
Ehrenfeucht-Fraissé game solver with memoized positions, and the greatest
back-and-forth family between two structures computed as a fixpoint over all
partial isomorphisms.
"""

from __future__ import annotations

import itertools
import logging
from functools import lru_cache
from typing import FrozenSet, Iterable, List, Tuple

from .errors import SignatureMismatchError
from .structures import FinStructure

logger = logging.getLogger(__name__)

PartialMap = Tuple[Tuple[int, int], ...]


def as_partial_map(pairs: Iterable[Tuple[int, int]]) -> PartialMap:
    return tuple(sorted(set((int(a), int(b)) for a, b in pairs)))


def is_partial_isomorphism(a: FinStructure, b: FinStructure, pairs: PartialMap) -> bool:
    """Injective and preserving every unnested atomic formula on its domain."""
    mapping = dict(pairs)
    if len(mapping) != len(pairs) or len(set(mapping.values())) != len(mapping):
        return False
    domain = list(mapping)
    image_set = set(mapping.values())
    for name, arity in a.signature.relations:
        table_a, table_b = a.relation(name), b.relation(name)
        if arity == 0:
            if bool(table_a) != bool(table_b):
                return False
            continue
        for cell in itertools.product(domain, repeat=arity):
            target = tuple(mapping[element] for element in cell)
            if bool(table_a[cell]) != bool(table_b[target]):
                return False
    for name, arity in a.signature.functions:
        table_a, table_b = a.function(name), b.function(name)
        for cell in itertools.product(domain, repeat=arity):
            value_a = int(table_a[cell])
            value_b = int(table_b[tuple(mapping[element] for element in cell)])
            if value_a in mapping:
                if mapping[value_a] != value_b:
                    return False
            elif value_b in image_set:
                return False
    constants_b = b.constants
    for name, value_a in a.constants.items():
        value_b = constants_b[name]
        if (value_a in mapping) != (value_b in image_set):
            return False
        if value_a in mapping and mapping[value_a] != value_b:
            return False
    return True


def _check_signatures(a: FinStructure, b: FinStructure) -> None:
    if a.signature != b.signature:
        raise SignatureMismatchError("Structures have different signatures")


def partial_isomorphisms(a: FinStructure, b: FinStructure) -> List[PartialMap]:
    _check_signatures(a, b)
    found: List[PartialMap] = []
    for size in range(min(a.size, b.size) + 1):
        for domain in itertools.combinations(range(a.size), size):
            for image in itertools.permutations(range(b.size), size):
                pairs = tuple(zip(domain, image))
                if is_partial_isomorphism(a, b, pairs):
                    found.append(pairs)
    return found


def greatest_back_and_forth_family(a: FinStructure, b: FinStructure) -> FrozenSet[PartialMap]:
    """Largest family of partial isomorphisms closed under back and forth extension."""
    family = set(partial_isomorphisms(a, b))
    changed = True
    while changed:
        changed = False
        for pairs in sorted(family):
            if not _extendable(pairs, family, a.size, b.size):
                family.discard(pairs)
                changed = True
    logger.debug("Back-and-forth fixpoint keeps %s partial maps", len(family))
    return frozenset(family)


def _extendable(pairs: PartialMap, family, size_a: int, size_b: int) -> bool:
    mapping = dict(pairs)
    image = set(mapping.values())
    for element in range(size_a):
        if element in mapping:
            continue
        if not any(as_partial_map(pairs + ((element, target),)) in family for target in range(size_b) if target not in image):
            return False
    for target in range(size_b):
        if target in image:
            continue
        if not any(as_partial_map(pairs + ((element, target),)) in family for element in range(size_a) if element not in mapping):
            return False
    return True


def back_and_forth_equivalent(a: FinStructure, b: FinStructure) -> bool:
    return () in greatest_back_and_forth_family(a, b)


def duplicator_wins(a: FinStructure, b: FinStructure, rounds: int, start: PartialMap = ()) -> bool:
    """Whether Duplicator survives ``rounds`` rounds of the Ehrenfeucht-Fraissé game."""
    _check_signatures(a, b)

    @lru_cache(maxsize=None)
    def wins(pairs: PartialMap, remaining: int) -> bool:
        if not is_partial_isomorphism(a, b, pairs):
            return False
        if remaining == 0:
            return True
        for element in range(a.size):
            if not any(wins(as_partial_map(pairs + ((element, target),)), remaining - 1) for target in range(b.size)):
                return False
        for target in range(b.size):
            if not any(wins(as_partial_map(pairs + ((element, target),)), remaining - 1) for element in range(a.size)):
                return False
        return True

    return wins(as_partial_map(start), rounds)
