import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scottlab.errors import (
    ArityError,
    BudgetExceededError,
    SignatureMismatchError,
    StructureFormatError,
    UnboundVariableError,
)
from scottlab.semantics import Evaluator, Verdict3
from scottlab.sexpr import parse_formula
from scottlab.structures import (
    FinStructure,
    automorphism_orbits,
    automorphisms,
    count_structures,
    dump_structure,
    enumerate_structures,
    isomorphic,
    isomorphism_classes,
    load_structure,
    orbit_of,
    parse_structure,
)
from scottlab.syntax import And, Atom, Exists, Forall, Or, Schema, Signature, Var


def _structure_text(**overrides):
    document = {
        "signature": {"relations": {"R": 2}, "functions": {}, "constants": []},
        "size": 2,
        "relations": {"R": [[0, 1]]},
        "functions": {},
        "constants": {},
    }
    document.update(overrides)
    return json.dumps(document)


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------


def test_load_path3(path3):
    assert path3.size == 3
    assert path3.relation_tuples("R") == [(0, 1), (1, 2)]


def test_function_and_constant_tables(pointed2):
    assert pointed2.apply("f", (0,)) == 1
    assert pointed2.constant("c") == 0
    assert pointed2.relabel((1, 0)).constants == {"c": 1}


def test_dump_reads_back(pointed2, data_dir):
    assert parse_structure(dump_structure(pointed2)) == pointed2
    assert load_structure(data_dir / "structures" / "pointed2.json") == pointed2


@pytest.mark.parametrize(
    "overrides, message",
    [
        ({"relations": {"R": [[0]]}}, "Relation R has arity 2, row \\[0\\] does not match"),
        ({"relations": {"R": [[0, 5]]}}, "leaves the universe"),
        ({"relations": {"S": [[0, 1]]}}, "Relation S is not in the signature"),
        ({"size": 0}, "Invalid structure file"),
        (
            {
                "signature": {"relations": {}, "functions": {"f": 1}, "constants": []},
                "relations": {},
                "functions": {"f": [[0, 1]]},
            },
            "Function f is not total",
        ),
        (
            {"signature": {"relations": {}, "functions": {}, "constants": ["c"]}, "relations": {}},
            "Constant c has no interpretation",
        ),
    ],
)
def test_rejected_structure_files(overrides, message):
    with pytest.raises(StructureFormatError, match=message):
        parse_structure(_structure_text(**overrides))


def test_induced_substructure(path3):
    assert path3.induced([0, 1]).relation_tuples("R") == [(0, 1)]
    assert path3.induced([0, 2]).relation_tuples("R") == []


def test_relabel_renames_elements(path3):
    relabelled = path3.relabel((2, 1, 0))
    assert relabelled.relation_tuples("R") == [(1, 0), (2, 1)]
    with pytest.raises(ValueError):
        path3.relabel((0, 0, 1))


# ---------------------------------------------------------------------------
# Enumeration and isomorphism
# ---------------------------------------------------------------------------


@pytest.fixture
def binary(data_dir):
    document = json.loads((data_dir / "signatures" / "binary.json").read_text())
    return Signature.build(document["relations"], document["functions"], document["constants"])


def test_count_and_classes_of_binary_structures(binary):
    assert count_structures(binary, 2) == 16
    structures = list(enumerate_structures(binary, 2))
    assert len(structures) == 16
    assert len(isomorphism_classes(structures)) == 10


def test_enumeration_ceiling_is_checked_up_front(binary):
    with pytest.raises(BudgetExceededError) as info:
        enumerate_structures(binary, 3, ceiling=100)
    assert info.value.count == 512


def test_isomorphism_finds_the_renaming(path3, cycle3):
    assert isomorphic(path3, path3.relabel((2, 1, 0))) == (2, 1, 0)
    assert isomorphic(path3, cycle3) is None


def test_isomorphism_needs_matching_signatures(path3, pointed2):
    with pytest.raises(SignatureMismatchError):
        isomorphic(path3, pointed2)


def test_automorphisms_of_cycle(cycle3, path3):
    assert len(automorphisms(cycle3)) == 3
    assert automorphisms(path3) == [(0, 1, 2)]
    assert len(automorphism_orbits(cycle3, 1)) == 1
    assert len(automorphism_orbits(cycle3, 2)) == 3
    assert orbit_of(cycle3, (0, 1)) == frozenset({(0, 1), (1, 2), (2, 0)})


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def test_evaluate_sentences(path3, cycle3):
    sink = parse_formula("(exists (x) (forall (y) (not (R x y))))")
    assert Evaluator(path3).evaluate(sink) is Verdict3.TRUE
    assert Evaluator(cycle3).evaluate(sink) is Verdict3.FALSE


@pytest.mark.parametrize(
    "structure, reflexive, irreflexive",
    [("loop1", Verdict3.TRUE, Verdict3.FALSE), ("path3", Verdict3.FALSE, Verdict3.TRUE)],
)
def test_reflexivity_files(data_dir, structure, reflexive, irreflexive):
    evaluator = Evaluator(load_structure(data_dir / "structures" / f"{structure}.json"))
    formulas = data_dir / "formulas"
    assert evaluator.evaluate(parse_formula((formulas / "reflexive.sexp").read_text())) is reflexive
    assert evaluator.evaluate(parse_formula((formulas / "irreflexive.sexp").read_text())) is irreflexive


def test_evaluate_with_functions(pointed2):
    formula = parse_formula("(and (= (f @c) x) (R @c x))")
    assert Evaluator(pointed2).evaluate(formula, {"x": 1}) is Verdict3.TRUE
    assert Evaluator(pointed2).evaluate(formula, {"x": 0}) is Verdict3.FALSE


def test_evaluation_errors(path3):
    with pytest.raises(UnboundVariableError):
        Evaluator(path3).evaluate(parse_formula("(R x y)"))
    with pytest.raises(ArityError):
        Evaluator(path3).evaluate(parse_formula("(R x)"), {"x": 0})
    with pytest.raises(SignatureMismatchError):
        Evaluator(path3).evaluate(parse_formula("(S x)"), {"x": 0})


@pytest.fixture
def ladder_structure():
    signature = Signature.build({f"U{n}": 1 for n in range(4)})
    return FinStructure(signature, 2, {f"U{n}": np.array([True, False]) for n in range(4)})


def _ladder(connective, bound=None):
    return connective(Schema("ladder", ("U",), (Var("x"),), bound=bound))


def test_unbounded_schema_is_settled_only_by_a_counterexample(ladder_structure):
    evaluator = Evaluator(ladder_structure, budget=4)
    assert evaluator.evaluate(_ladder(And), {"x": 0}) is Verdict3.UNKNOWN
    assert evaluator.evaluate(_ladder(And), {"x": 1}) is Verdict3.FALSE
    assert evaluator.evaluate(_ladder(Or), {"x": 0}) is Verdict3.TRUE
    assert evaluator.evaluate(_ladder(Or), {"x": 1}) is Verdict3.UNKNOWN


def test_relativized_schema_is_two_valued(ladder_structure):
    evaluator = Evaluator(ladder_structure, budget=4, relativize=True)
    assert evaluator.evaluate(_ladder(And), {"x": 0}) is Verdict3.TRUE
    assert evaluator.evaluate(_ladder(Or), {"x": 1}) is Verdict3.FALSE


def test_exhausted_schemas(path3):
    assert Evaluator(path3).evaluate(_ladder(And, bound=0), {"x": 0}) is Verdict3.TRUE
    assert Evaluator(path3).evaluate(_ladder(Or, bound=0), {"x": 0}) is Verdict3.FALSE


# ---------------------------------------------------------------------------
# Properties of the evaluator
# ---------------------------------------------------------------------------

RUNGS = 6
LADDER_SIGNATURE = Signature.build({"R": 2, **{f"U{n}": 1 for n in range(RUNGS)}})

NAMES = st.sampled_from(["x", "y", "z"])

LITERALS = st.one_of(
    st.builds(lambda a, b, positive: Atom("R", (Var(a), Var(b)), positive), NAMES, NAMES, st.booleans()),
    st.builds(lambda a, b, positive: Atom("=", (Var(a), Var(b)), positive), NAMES, NAMES, st.booleans()),
    st.builds(
        lambda connective, name, bound, negated: connective(Schema("ladder", ("U",), (Var(name),), bound, negated)),
        st.sampled_from([And, Or]),
        NAMES,
        st.one_of(st.none(), st.integers(0, RUNGS)),
        st.booleans(),
    ),
)

SENTENCES = st.builds(
    lambda quantifier, body: quantifier(("x", "y", "z"), body),
    st.sampled_from([Forall, Exists]),
    st.recursive(
        LITERALS,
        lambda children: st.one_of(
            st.lists(children, max_size=3).map(lambda parts: And(tuple(parts))),
            st.lists(children, max_size=3).map(lambda parts: Or(tuple(parts))),
            st.builds(Forall, NAMES.map(lambda name: (name,)), children),
            st.builds(Exists, NAMES.map(lambda name: (name,)), children),
        ),
        max_leaves=8,
    ),
)


@st.composite
def ladder_structures(draw):
    size = draw(st.integers(1, 3))
    cells = st.lists(st.booleans(), min_size=size, max_size=size)
    relations = {"R": draw(st.lists(cells, min_size=size, max_size=size))}
    relations.update({f"U{n}": draw(cells) for n in range(RUNGS)})
    return FinStructure(LADDER_SIGNATURE, size, relations)


@settings(max_examples=300, deadline=None)
@given(ladder_structures(), SENTENCES, st.integers(0, RUNGS), st.integers(0, RUNGS))
def test_settled_verdicts_survive_a_larger_budget(structure, sentence, low, high):
    low, high = sorted((low, high))
    settled = Evaluator(structure, budget=low).evaluate(sentence)
    if settled.is_determinate:
        assert Evaluator(structure, budget=high).evaluate(sentence) is settled


@settings(max_examples=300, deadline=None)
@given(ladder_structures(), SENTENCES, st.integers(0, RUNGS), st.data())
def test_verdicts_ignore_relabeling(structure, sentence, budget, data):
    perm = data.draw(st.permutations(range(structure.size)))
    expected = Evaluator(structure, budget=budget).evaluate(sentence)
    assert Evaluator(structure.relabel(perm), budget=budget).evaluate(sentence) is expected
