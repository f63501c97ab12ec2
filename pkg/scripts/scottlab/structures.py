"""
Finite structures
-----------------

``FinStructure`` is the desk-scale stand-in for a countable model: elements
``0..n-1``, one read-only numpy tensor per relation (bool) and per function
(int), and constant interpretations. Alongside it live the brute-force
oracles the rest of the package checks itself against: exhaustive
enumeration, backtracking isomorphism with a lexicographically least witness,
automorphisms and automorphism orbits of k-tuples.

Structure files are JSON:

    {"signature": {"relations": {"R": 2}, "functions": {}, "constants": []},
     "size": 3,
     "relations": {"R": [[0, 1], [1, 2]]},
     "functions": {},
     "constants": {}}
"""

from __future__ import annotations

import itertools
import json
import logging
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from .errors import BudgetExceededError, SignatureMismatchError, StructureFormatError
from .semantics import Universe, check_arity
from .syntax import Signature

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CEILING = 100_000


class SignatureModel(BaseModel):
    relations: Dict[str, int] = Field(default_factory=dict)
    functions: Dict[str, int] = Field(default_factory=dict)
    constants: List[str] = Field(default_factory=list)

    def to_signature(self) -> Signature:
        for name, arity in list(self.relations.items()) + list(self.functions.items()):
            if arity < 0:
                raise StructureFormatError(f"Symbol {name} has negative arity {arity}")
        return Signature.build(self.relations, self.functions, self.constants)


class StructureFile(BaseModel):
    signature: SignatureModel
    size: int = Field(ge=1)
    relations: Dict[str, List[List[int]]] = Field(default_factory=dict)
    functions: Dict[str, List[List[int]]] = Field(default_factory=dict)
    constants: Dict[str, int] = Field(default_factory=dict)


def _cells(size: int, arity: int) -> List[Tuple[int, ...]]:
    return list(itertools.product(range(size), repeat=arity))


class FinStructure(Universe):
    complete = True

    def __init__(
        self,
        signature: Signature,
        size: int,
        relations: Optional[Mapping[str, Any]] = None,
        functions: Optional[Mapping[str, Any]] = None,
        constants: Optional[Mapping[str, int]] = None,
    ):
        if size < 1:
            raise StructureFormatError("Universe must be nonempty")
        self.signature = signature
        self.size = size
        self._relations: Dict[str, np.ndarray] = {}
        self._functions: Dict[str, np.ndarray] = {}
        self._constants: Dict[str, int] = {}

        relations = dict(relations or {})
        functions = dict(functions or {})
        constants = dict(constants or {})
        relation_arity = signature.relation_arity
        function_arity = signature.function_arity

        for name in set(relations) - set(relation_arity):
            raise StructureFormatError(f"Relation {name} is not in the signature")
        for name in set(functions) - set(function_arity):
            raise StructureFormatError(f"Function {name} is not in the signature")
        for name in set(constants) - set(signature.constants):
            raise StructureFormatError(f"Constant {name} is not in the signature")

        for name, arity in relation_arity.items():
            table = np.asarray(relations.get(name, np.zeros((size,) * arity, dtype=bool)), dtype=bool)
            if table.shape != (size,) * arity:
                raise StructureFormatError(f"Relation {name} table has shape {table.shape}, expected arity {arity}")
            table = table.copy()
            table.setflags(write=False)
            self._relations[name] = table
        for name, arity in function_arity.items():
            if name not in functions:
                raise StructureFormatError(f"Function {name} has no table")
            table = np.asarray(functions[name], dtype=np.int64)
            if table.shape != (size,) * arity:
                raise StructureFormatError(f"Function {name} table has shape {table.shape}, expected arity {arity}")
            if table.size and (table.min() < 0 or table.max() >= size):
                raise StructureFormatError(f"Function {name} leaves the universe")
            table = table.copy()
            table.setflags(write=False)
            self._functions[name] = table
        for name in signature.constants:
            if name not in constants:
                raise StructureFormatError(f"Constant {name} has no interpretation")
            value = int(constants[name])
            if not 0 <= value < size:
                raise StructureFormatError(f"Constant {name} = {value} is outside the universe")
            self._constants[name] = value

        self._tuple_sets: Dict[str, FrozenSet[Tuple[int, ...]]] = {
            name: frozenset(tuple(int(i) for i in index) for index in zip(*np.nonzero(table)))
            if table.ndim
            else (frozenset({()}) if bool(table) else frozenset())
            for name, table in self._relations.items()
        }
        self._function_maps: Dict[str, Dict[Tuple[int, ...], int]] = {
            name: {cell: int(table[cell]) for cell in _cells(size, table.ndim)}
            for name, table in self._functions.items()
        }

    # -- Universe interface -------------------------------------------------

    def elements(self) -> Sequence[int]:
        return range(self.size)

    def holds(self, relation: str, values: Tuple[Any, ...]) -> bool:
        check_arity(self.signature.relation_arity, relation, values, "relation")
        return values in self._tuple_sets[relation]

    def apply(self, function: str, values: Tuple[Any, ...]) -> int:
        check_arity(self.signature.function_arity, function, values, "function")
        return self._function_maps[function][values]

    def constant(self, name: str) -> int:
        if name not in self._constants:
            raise SignatureMismatchError(f"Unknown constant symbol {name}")
        return self._constants[name]

    # -- tables ---------------------------------------------------------------

    def relation(self, name: str) -> np.ndarray:
        return self._relations[name]

    def function(self, name: str) -> np.ndarray:
        return self._functions[name]

    @property
    def constants(self) -> Dict[str, int]:
        return dict(self._constants)

    def relation_tuples(self, name: str) -> List[Tuple[int, ...]]:
        return sorted(self._tuple_sets[name])

    def canonical_key(self) -> Tuple[Any, ...]:
        return (
            self.size,
            tuple((name, self._relations[name].tobytes()) for name in sorted(self._relations)),
            tuple((name, self._functions[name].tobytes()) for name in sorted(self._functions)),
            tuple(sorted(self._constants.items())),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FinStructure):
            return NotImplemented
        return self.signature == other.signature and self.canonical_key() == other.canonical_key()

    def __hash__(self) -> int:
        return hash((self.signature, self.canonical_key()))

    def __repr__(self) -> str:
        rels = ", ".join(f"{name}={self.relation_tuples(name)}" for name in sorted(self._relations))
        return f"FinStructure(size={self.size}, {rels})"

    def relabel(self, perm: Sequence[int]) -> "FinStructure":
        """The copy in which element ``a`` is renamed ``perm[a]``."""
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.size)):
            raise ValueError(f"Not a permutation of {self.size} elements: {perm.tolist()}")
        inverse = np.argsort(perm)
        relations = {name: _pull_back(table, inverse) for name, table in self._relations.items()}
        functions = {name: perm[_pull_back(table, inverse)] for name, table in self._functions.items()}
        constants = {name: int(perm[value]) for name, value in self._constants.items()}
        return FinStructure(self.signature, self.size, relations, functions, constants)

    def reduct(self, relations: Sequence[str]) -> "FinStructure":
        signature = Signature.build({name: self.signature.relation_arity[name] for name in relations})
        return FinStructure(signature, self.size, {name: self._relations[name] for name in relations})

    def induced(self, elements: Sequence[int]) -> "FinStructure":
        """Induced substructure on ``elements`` (relational signatures only)."""
        if self._functions or self._constants:
            raise StructureFormatError("Induced substructures need a purely relational signature")
        index = np.asarray(elements, dtype=np.int64)
        relations = {
            name: table[np.ix_(*([index] * table.ndim))] if table.ndim else table
            for name, table in self._relations.items()
        }
        return FinStructure(self.signature, len(elements), relations)


def _pull_back(table: np.ndarray, inverse: np.ndarray) -> np.ndarray:
    if table.ndim == 0:
        return table.copy()
    return table[np.ix_(*([inverse] * table.ndim))]


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


def structure_from_model(model: StructureFile) -> FinStructure:
    signature = model.signature.to_signature()
    size = model.size
    relation_arity = signature.relation_arity
    function_arity = signature.function_arity
    relations: Dict[str, np.ndarray] = {}
    functions: Dict[str, np.ndarray] = {}

    for name, rows in model.relations.items():
        if name not in relation_arity:
            raise StructureFormatError(f"Relation {name} is not in the signature")
        arity = relation_arity[name]
        table = np.zeros((size,) * arity, dtype=bool)
        for row in rows:
            if len(row) != arity:
                raise StructureFormatError(f"Relation {name} has arity {arity}, row {row} does not match")
            if any(not 0 <= value < size for value in row):
                raise StructureFormatError(f"Relation {name} row {row} leaves the universe")
            table[tuple(row)] = True
        relations[name] = table

    for name, rows in model.functions.items():
        if name not in function_arity:
            raise StructureFormatError(f"Function {name} is not in the signature")
        arity = function_arity[name]
        table = np.full((size,) * arity, -1, dtype=np.int64)
        for row in rows:
            if len(row) != arity + 1:
                raise StructureFormatError(f"Function {name} has arity {arity}, row {row} does not match")
            if any(not 0 <= value < size for value in row):
                raise StructureFormatError(f"Function {name} row {row} leaves the universe")
            table[tuple(row[:-1])] = row[-1]
        if (table < 0).any():
            raise StructureFormatError(f"Function {name} is not total")
        functions[name] = table

    return FinStructure(signature, size, relations, functions, dict(model.constants))


def parse_structure(text: str) -> FinStructure:
    try:
        model = StructureFile.model_validate_json(text)
    except ValidationError as exc:
        raise StructureFormatError(f"Invalid structure file: {exc}") from None
    return structure_from_model(model)


def load_structure(path: Path) -> FinStructure:
    return parse_structure(Path(path).read_text(encoding="utf-8"))


def structure_to_dict(structure: FinStructure) -> Dict[str, Any]:
    signature = structure.signature
    return {
        "signature": {
            "relations": dict(signature.relations),
            "functions": dict(signature.functions),
            "constants": list(signature.constants),
        },
        "size": structure.size,
        "relations": {
            name: [list(row) for row in structure.relation_tuples(name)] for name, _ in signature.relations
        },
        "functions": {
            name: [
                list(cell) + [int(structure.function(name)[cell])]
                for cell in _cells(structure.size, arity)
            ]
            for name, arity in signature.functions
        },
        "constants": structure.constants,
    }


def dump_structure(structure: FinStructure) -> str:
    return json.dumps(structure_to_dict(structure), sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def count_structures(signature: Signature, size: int) -> int:
    total = 1
    for _, arity in signature.relations:
        total *= 2 ** (size ** arity)
    for _, arity in signature.functions:
        total *= size ** (size ** arity)
    total *= size ** len(signature.constants)
    return total


def enumerate_structures(
    signature: Signature, size: int, ceiling: Optional[int] = DEFAULT_ENUMERATION_CEILING
) -> Iterator[FinStructure]:
    """Every structure on ``0..size-1`` in a fixed order; refuses above ``ceiling``."""
    if size < 1:
        raise StructureFormatError("Universe must be nonempty")
    count = count_structures(signature, size)
    if ceiling is not None and count > ceiling:
        raise BudgetExceededError(
            f"{count} structures of size {size} exceed the enumeration ceiling {ceiling}", count=count
        )
    logger.debug("Enumerating %s structures of size %s", count, size)
    return _generate(signature, size)


def _generate(signature: Signature, size: int) -> Iterator[FinStructure]:
    relation_axes = []
    for name, arity in signature.relations:
        cells = size ** arity
        relation_axes.append([(name, arity, mask) for mask in range(2 ** cells)])
    function_axes = []
    for name, arity in signature.functions:
        cells = size ** arity
        function_axes.append([(name, arity, values) for values in itertools.product(range(size), repeat=cells)])
    constant_axes = [[(name, value) for value in range(size)] for name in signature.constants]

    for relation_choice in itertools.product(*relation_axes):
        relations = {}
        for name, arity, mask in relation_choice:
            bits = [(mask >> position) & 1 for position in range(size ** arity)]
            relations[name] = np.array(bits, dtype=bool).reshape((size,) * arity)
        for function_choice in itertools.product(*function_axes):
            functions = {
                name: np.array(values, dtype=np.int64).reshape((size,) * arity)
                for name, arity, values in function_choice
            }
            for constant_choice in itertools.product(*constant_axes):
                yield FinStructure(signature, size, relations, functions, dict(constant_choice))


# ---------------------------------------------------------------------------
# Isomorphism and automorphisms
# ---------------------------------------------------------------------------


def _invariants(structure: FinStructure) -> List[Tuple[Any, ...]]:
    """Per-element data any isomorphism must preserve."""
    rows: List[List[Any]] = [[] for _ in range(structure.size)]
    for name, arity in structure.signature.relations:
        table = structure.relation(name)
        if arity == 0:
            continue
        diagonal = table[tuple([np.arange(structure.size)] * arity)]
        for element in range(structure.size):
            rows[element].append(bool(diagonal[element]))
            for axis in range(arity):
                rows[element].append(int(np.take(table, element, axis=axis).sum()))
    for name, value in structure.constants.items():
        for element in range(structure.size):
            rows[element].append(element == value)
    return [tuple(row) for row in rows]


def _consistent(a: FinStructure, b: FinStructure, domain: List[int], image: List[int]) -> bool:
    for name, arity in a.signature.relations:
        if arity == 0:
            continue
        left = a.relation(name)[np.ix_(*([domain] * arity))]
        right = b.relation(name)[np.ix_(*([image] * arity))]
        if not np.array_equal(left, right):
            return False
    mapping = dict(zip(domain, image))
    for name, arity in a.signature.functions:
        table_a, table_b = a.function(name), b.function(name)
        for cell in itertools.product(domain, repeat=arity):
            value = int(table_a[cell])
            if value in mapping:
                target = tuple(mapping[element] for element in cell)
                if int(table_b[target]) != mapping[value]:
                    return False
    return True


def _bijections(a: FinStructure, b: FinStructure) -> Iterator[Tuple[int, ...]]:
    if a.signature != b.signature:
        raise SignatureMismatchError("Structures have different signatures")
    if a.size != b.size:
        return
    for name, arity in a.signature.relations:
        if arity == 0 and bool(a.relation(name)) != bool(b.relation(name)):
            return
    inv_a, inv_b = _invariants(a), _invariants(b)
    if sorted(inv_a) != sorted(inv_b):
        return
    size = a.size
    image: List[int] = []
    used = [False] * size

    def extend(element: int) -> Iterator[Tuple[int, ...]]:
        if element == size:
            yield tuple(image)
            return
        for candidate in range(size):
            if used[candidate] or inv_a[element] != inv_b[candidate]:
                continue
            image.append(candidate)
            used[candidate] = True
            if _consistent(a, b, list(range(element + 1)), image):
                yield from extend(element + 1)
            image.pop()
            used[candidate] = False

    for perm in extend(0):
        if a.relabel(perm) == b:
            yield perm


def isomorphic(a: FinStructure, b: FinStructure) -> Optional[Tuple[int, ...]]:
    """Lexicographically least isomorphism ``a -> b`` as a tuple of images, or None."""
    return next(_bijections(a, b), None)


def automorphisms(structure: FinStructure) -> List[Tuple[int, ...]]:
    return list(_bijections(structure, structure))


def automorphism_orbits(structure: FinStructure, k: int) -> List[List[Tuple[int, ...]]]:
    """Partition of all k-tuples into automorphism orbits, blocks in tuple order."""
    tuples = list(itertools.product(range(structure.size), repeat=k))
    parent = {t: t for t in tuples}

    def find(t):
        while parent[t] != t:
            parent[t] = parent[parent[t]]
            t = parent[t]
        return t

    for perm in automorphisms(structure):
        for t in tuples:
            image = tuple(perm[element] for element in t)
            root_t, root_image = find(t), find(image)
            if root_t != root_image:
                parent[max(root_t, root_image)] = min(root_t, root_image)

    blocks: Dict[Tuple[int, ...], List[Tuple[int, ...]]] = {}
    for t in tuples:
        blocks.setdefault(find(t), []).append(t)
    return [blocks[root] for root in sorted(blocks)]


def orbit_of(structure: FinStructure, tup: Sequence[int]) -> FrozenSet[Tuple[int, ...]]:
    return frozenset(tuple(perm[element] for element in tup) for perm in automorphisms(structure))


def isomorphism_classes(structures: Sequence[FinStructure]) -> List[List[int]]:
    """Indices of ``structures`` grouped by isomorphism type, in first-seen order."""
    classes: List[List[int]] = []
    for index, structure in enumerate(structures):
        for block in classes:
            if isomorphic(structures[block[0]], structure) is not None:
                block.append(index)
                break
        else:
            classes.append([index])
    return classes
