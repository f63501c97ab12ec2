"""
Staged trees and path structures
--------------------------------

A finite halting trace (pairs ``(k, s)``: "k enters at stage s") drives the
staged construction of a binary tree in which every node ``σ`` has ``σ0`` and
the one branch that is not isolated reads ``0^{s0} 1^{k0} 0^{s1} 1^{k1} ...``
with the k's increasing. Nodes are strings over ``"01"``.

From a tree we build unary structures over ``U0..U{d-1}``: an element labelled
by a path satisfies ``Un`` exactly when the path has a 1 at position n. The
A-approximation puts ``copies`` elements on every isolated path ``σ0^ω``
(truncated to the depth); the B-approximation adds elements on the special
branch.

Trace files are JSON lists of ``[k, s]`` pairs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import NonNegativeInt, TypeAdapter, ValidationError

from .complexity import is_sigma
from .errors import PreconditionError, TraceError
from .semantics import Evaluator, Verdict3
from .sexpr import format_formula
from .structures import FinStructure, isomorphic
from .syntax import TOP, Atom, Formula, Signature, Var, conj, counting_exists, disj, forall

logger = logging.getLogger(__name__)

TraceEntry = Tuple[int, int]

_TRACE_ADAPTER = TypeAdapter(List[Tuple[NonNegativeInt, NonNegativeInt]])

FLAVORS = ("A", "B")


def parse_trace(text: str) -> List[TraceEntry]:
    try:
        entries = _TRACE_ADAPTER.validate_json(text)
    except ValidationError as exc:
        raise TraceError(f"Invalid trace file: {exc}") from None
    return [tuple(entry) for entry in entries]


def load_trace(path: Path) -> List[TraceEntry]:
    return parse_trace(Path(path).read_text(encoding="utf-8"))


def special_word(trace: Sequence[TraceEntry], stage: int) -> str:
    """``0^{s0} 1^{k0} ...`` over the entries halted by ``stage``, k increasing."""
    halted = sorted((k, s) for k, s in trace if s <= stage and k <= stage)
    return "".join("0" * s + "1" * k for k, s in halted)


@dataclass(frozen=True)
class StagedTree:
    trace: Tuple[TraceEntry, ...]
    depth: int
    stages: Tuple[FrozenSet[str], ...]

    @property
    def nodes(self) -> FrozenSet[str]:
        return self.stages[-1]

    @property
    def special_branch(self) -> str:
        return special_word(self.trace, self.depth)

    def level(self, n: int) -> List[str]:
        return sorted(node for node in self.nodes if len(node) == n)

    def sorted_nodes(self) -> List[str]:
        return sorted(self.nodes, key=lambda node: (len(node), node))

    def terminal_nodes(self) -> List[str]:
        """Nodes strictly below the built depth with no child."""
        return [
            node
            for node in self.sorted_nodes()
            if len(node) < self.depth and node + "0" not in self.nodes and node + "1" not in self.nodes
        ]

    def is_prefix_closed(self) -> bool:
        return all(all(node[:i] in stage for i in range(len(node))) for stage in self.stages for node in stage)

    def is_monotone(self) -> bool:
        return all(a <= b for a, b in zip(self.stages, self.stages[1:]))

    def to_text(self) -> str:
        lines = [f"depth: {self.depth}", f"special branch: {self.special_branch or '(empty)'}"]
        lines += [node or "ε" for node in self.sorted_nodes()]
        return "\n".join(lines) + "\n"


def build_tree(trace: Sequence[TraceEntry], depth: int) -> StagedTree:
    if depth < 1:
        raise TraceError("Tree depth must be at least 1")
    trace = tuple((int(k), int(s)) for k, s in trace)
    ks = [k for k, _ in trace]
    if len(set(ks)) != len(ks):
        duplicated = sorted({k for k in ks if ks.count(k) > 1})
        raise TraceError(f"Trace lists k more than once: {duplicated}")
    if any(k < 0 or s < 0 for k, s in trace):
        raise TraceError("Trace entries must be natural numbers")

    stages: List[FrozenSet[str]] = [frozenset({""})]
    for stage in range(1, depth + 1):
        previous = stages[-1]
        nodes = set(previous)
        segment = special_word(trace, stage)[:stage]
        nodes.update(segment[:i] for i in range(len(segment) + 1))
        # σ0-padding up to the stage length
        nodes.update(node + "0" * pad for node in list(nodes) for pad in range(1, stage - len(node) + 1))
        stages.append(frozenset(nodes))
    logger.debug("Built tree of depth %s with %s nodes", depth, len(stages[-1]))
    return StagedTree(trace, depth, tuple(stages))


# ---------------------------------------------------------------------------
# Formulas and axioms
# ---------------------------------------------------------------------------


def predicate(n: int) -> str:
    return f"U{n}"


def sigma_formula(sigma: str, var: str = "x") -> Formula:
    """Conjunction of ``Un x`` where σ(n) = 1 and ``¬Un x`` where σ(n) = 0."""
    if set(sigma) - {"0", "1"}:
        raise ValueError(f"Not a binary string: {sigma!r}")
    return conj(Atom(predicate(n), (Var(var),), bit == "1") for n, bit in enumerate(sigma)) if sigma else TOP


def level_formula(tree: StagedTree, n: int, var: str = "x") -> Formula:
    return disj(sigma_formula(node, var) for node in tree.level(n))


def axioms(tree: StagedTree, depth: int, count: int) -> List[Formula]:
    """``(∀x) T_n(x)`` for n ≤ depth and ``(∃^{≥c} x) σ(x)`` for σ in the tree and c ≤ count."""
    if depth > tree.depth:
        raise PreconditionError(f"Depth {depth} exceeds the built tree ({tree.depth})")
    sentences = [forall(("x",), level_formula(tree, n)) for n in range(depth + 1)]
    for node in tree.sorted_nodes():
        if len(node) > depth:
            continue
        sentences.extend(counting_exists(c, "x", sigma_formula(node)) for c in range(1, count + 1))
    return sentences


# ---------------------------------------------------------------------------
# Path structures
# ---------------------------------------------------------------------------


def _pad(node: str, depth: int) -> str:
    return node[:depth] + "0" * (depth - len(node[:depth]))


@dataclass
class PathStructure:
    structure: FinStructure
    labels: List[str]
    flavor: str
    special: List[int] = field(default_factory=list)

    def satisfying(self, n: int) -> List[int]:
        return [index for index, label in enumerate(self.labels) if label[n] == "1"]


def _path_structure(labels: Sequence[str], depth: int) -> FinStructure:
    signature = Signature.build({predicate(n): 1 for n in range(depth)})
    bits = np.array([[bit == "1" for bit in label] for label in labels], dtype=bool).reshape(len(labels), depth)
    return FinStructure(signature, len(labels), {predicate(n): bits[:, n] for n in range(depth)})


def build_structure(
    tree: StagedTree,
    flavor: str,
    depth: Optional[int] = None,
    copies: int = 1,
    special_count: int = 1,
) -> PathStructure:
    depth = tree.depth if depth is None else depth
    if flavor not in FLAVORS:
        raise PreconditionError(f"Unknown flavor {flavor!r}; expected one of {FLAVORS}")
    if depth > tree.depth:
        raise PreconditionError(f"Depth {depth} exceeds the built tree ({tree.depth})")
    if depth < 1 or copies < 1 or special_count < 1:
        raise PreconditionError("Depth, copies and special count must be at least 1")
    paths = sorted({_pad(node, depth) for node in tree.nodes if len(node) <= depth})
    labels = [path for path in paths for _ in range(copies)]
    special: List[int] = []
    if flavor == "B":
        special = list(range(len(labels), len(labels) + special_count))
        labels += [_pad(tree.special_branch, depth)] * special_count
    return PathStructure(_path_structure(labels, depth), labels, flavor, special)


def capped_reducts_isomorphic(tree: StagedTree, depth: int, copies: int, m: int) -> bool:
    """Reducts to ``U0..U{m-1}`` of both approximations, each label class cut to ``copies`` elements."""
    if not 0 <= m <= depth:
        raise PreconditionError(f"Reduct width {m} must lie in 0..{depth}")
    capped = []
    for flavor in FLAVORS:
        built = build_structure(tree, flavor, depth, copies)
        seen: Dict[str, int] = {}
        keep = []
        for index, label in enumerate(built.labels):
            prefix = label[:m]
            if seen.get(prefix, 0) < copies:
                seen[prefix] = seen.get(prefix, 0) + 1
                keep.append(index)
        capped.append(built.structure.reduct([predicate(n) for n in range(m)]).induced(keep))
    if capped[0].size != capped[1].size:
        return False
    return isomorphic(capped[0], capped[1]) is not None


# ---------------------------------------------------------------------------
# Σ₂ transfer probe
# ---------------------------------------------------------------------------


@dataclass
class ProbeReport:
    sentence: str
    depth: int
    copies: int
    frame: pd.DataFrame

    @property
    def verdicts(self) -> Dict[str, str]:
        return dict(zip(self.frame["flavor"], self.frame["verdict"]))

    @property
    def flagged(self) -> bool:
        verdicts = self.verdicts
        return verdicts["B"] == Verdict3.TRUE.value and verdicts["A"] == Verdict3.FALSE.value

    def to_text(self) -> str:
        verdicts = self.verdicts
        lines = [
            f"sentence: {self.sentence}",
            f"bounds: depth={self.depth} copies={self.copies}",
            f"B-approx: {verdicts['B']}",
            f"A-approx: {verdicts['A']}",
        ]
        if self.flagged:
            lines.append(
                "flagged: true on B-approx and false on A-approx; the truncation cuts isolated paths "
                "at the depth and caps each at the copy count, so this pair says nothing about the countable models"
            )
        return "\n".join(lines) + "\n"


def sigma2_transfer_probe(
    tree: StagedTree,
    sentence: Formula,
    depth: Optional[int] = None,
    copies: int = 1,
    budget: int = 64,
) -> ProbeReport:
    if not is_sigma(sentence, 2):
        raise PreconditionError("Transfer probes take Σ₂ sentences")
    depth = tree.depth if depth is None else depth
    rows = []
    for flavor in ("B", "A"):
        built = build_structure(tree, flavor, depth, copies)
        verdict = Evaluator(built.structure, budget=budget).evaluate(sentence)
        rows.append({"flavor": flavor, "size": built.structure.size, "verdict": verdict.value})
    report = ProbeReport(format_formula(sentence), depth, copies, pd.DataFrame(rows))
    if report.flagged:
        logger.warning("Transfer probe flagged %s at depth %s", report.sentence, depth)
    return report
