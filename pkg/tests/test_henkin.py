import json

import pytest

from scottlab.complexity import is_d_sigma, is_pi, is_sigma
from scottlab.errors import ConstructionHalted, MalformedDemandError, PreconditionError, SearchBudgetExhausted
from scottlab.henkin import (
    AtomicDemand,
    ConjunctDemand,
    ConsistencySession,
    DisjunctDemand,
    EqualityDemand,
    WitnessDemand,
    build_model_chain,
    cp_member,
    d_sigma_scott_from_pair,
    extract_orbit_generator,
    extract_separator,
    pi_candidates,
)
from scottlab.ordinals import Ordinal
from scottlab.scott import (
    FiniteMapFamily,
    OrbitFamily,
    check_back_and_forth,
    diagram_sentence,
    satisfying_tuples,
    scott_sentence_from_orbits,
    verify_scott_sentence,
)
from scottlab.semantics import Evaluator, Verdict3
from scottlab.sexpr import format_formula, parse_formula
from scottlab.structures import automorphism_orbits, enumerate_structures, isomorphic, load_structure
from scottlab.syntax import TOP, Atom, Henkin, free_vars

R01 = parse_formula("(R $0 $1)")


def test_membership_finds_the_least_injective_interpretation(path3):
    assert cp_member(path3, [R01]) == {0: 0, 1: 1}
    assert cp_member(path3, [parse_formula("(R $1 $0)")]) == {0: 1, 1: 0}
    assert cp_member(path3, []) == {}


def test_membership_rejects_unrealizable_sets(path3):
    assert cp_member(path3, [parse_formula("(R $0 $0)")]) is None
    assert cp_member(path3, [R01, parse_formula("(R $1 $0)")]) is None
    assert cp_member(path3, [parse_formula("(= $0 $3)")]) is None


# ---------------------------------------------------------------------------
# Closure steps
# ---------------------------------------------------------------------------


@pytest.fixture
def session(path3):
    return ConsistencySession(path3)


def test_atomic_demand_adds_the_realizable_side(session):
    sentences = frozenset({R01})
    extended = session.closure_step(sentences, AtomicDemand(Atom("R", (Henkin(1), Henkin(2)))))
    assert extended == sentences | {parse_formula("(R $1 $2)")}
    extended = session.closure_step(sentences, AtomicDemand(Atom("R", (Henkin(1), Henkin(0)))))
    assert extended == sentences | {parse_formula("(not (R $1 $0))")}


def test_conjunct_demand_instantiates_the_universal(session):
    universal = parse_formula("(forall (x) (not (R x $0)))")
    extended = session.closure_step(frozenset({universal}), ConjunctDemand(universal, 0, (1,)))
    assert parse_formula("(not (R $1 $0))") in extended


def test_disjunct_demand_picks_the_first_consistent_witness(session):
    existential = parse_formula("(exists (y) (R $0 y))")
    extended = session.closure_step(frozenset({existential}), DisjunctDemand(existential))
    assert extended == frozenset({existential, R01})


def test_malformed_demands(session):
    with pytest.raises(MalformedDemandError):
        session.closure_step(frozenset({R01}), EqualityDemand(0, 1))
    with pytest.raises(MalformedDemandError):
        session.closure_step(frozenset(), ConjunctDemand(parse_formula("(forall (x) (R x x))"), 0, (0,)))
    with pytest.raises(MalformedDemandError):
        session.closure_step(frozenset(), WitnessDemand(0, (0,)))


def test_equality_of_a_constant_with_itself(session):
    extended = session.closure_step(frozenset({R01}), EqualityDemand(0, 0))
    assert parse_formula("(= $0 $0)") in extended


@pytest.mark.parametrize("alpha", [1, Ordinal.omega()])
def test_session_needs_a_finite_alpha_of_at_least_two(path3, alpha):
    with pytest.raises(PreconditionError):
        ConsistencySession(path3, alpha=alpha)


def test_target_must_fit_under_alpha(path3):
    with pytest.raises(PreconditionError):
        ConsistencySession(path3, target=parse_formula("(forall (x) (exists (y) (forall (z) (R y z))))"))
    with pytest.raises(PreconditionError):
        ConsistencySession(path3, target=parse_formula("(exists (y) (R x y))"))


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------


def test_chain_reads_off_the_target(path3):
    session = ConsistencySession(path3)
    result = build_model_chain(session, 200)
    assert result.steps == 9
    assert result.complete
    assert result.structure == path3
    assert result.all_true
    assert len(result.chain) == 10
    events = [json.loads(line)["event"] for line in session.transcript_lines()]
    assert events.count("demand") == 9


def test_chain_on_a_cycle(cycle3):
    result = build_model_chain(ConsistencySession(cycle3), 200)
    assert result.complete
    assert isomorphic(result.structure, cycle3) is not None


def test_chain_stops_after_the_step_budget(path3):
    result = build_model_chain(ConsistencySession(path3), 4)
    assert result.steps == 4
    assert result.pending == 5
    assert not result.complete


def test_unsatisfiable_target_halts_on_a_witness(path3, data_dir):
    target = parse_formula((data_dir / "formulas" / "broken_scott.sexp").read_text())
    with pytest.raises(ConstructionHalted) as info:
        build_model_chain(ConsistencySession(path3, target=target), 200)
    assert info.value.demand.condition == 7
    assert info.value.chain


def test_satisfiable_target_completes(cycle3, data_dir):
    target = parse_formula((data_dir / "formulas" / "broken_scott.sexp").read_text())
    result = build_model_chain(ConsistencySession(cycle3, target=target), 200)
    assert result.complete
    assert Evaluator(result.structure).evaluate(target) is Verdict3.TRUE


def test_initial_set_must_be_realized(path3):
    with pytest.raises(PreconditionError):
        build_model_chain(ConsistencySession(path3), 10, initial=[parse_formula("(R $0 $0)")])


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------


def test_orbit_generator_of_a_path_endpoint(path3):
    formula = extract_orbit_generator(path3, (0,))
    assert format_formula(formula) == (
        "(exists (y1 y2) (and (R x1 y1) (R y1 y2) (not (= x1 y1)) (not (= x1 y2)) (not (= y1 y2))))"
    )


def test_orbit_generator_of_a_transitive_structure_holds_everywhere(cycle3):
    generator = extract_orbit_generator(cycle3, (0,))
    assert free_vars(generator) == frozenset({"x1"})
    assert satisfying_tuples(cycle3, generator, 1) == [(0,), (1,), (2,)]


@pytest.mark.parametrize("name", ["path3", "cycle3", "edge2"])
def test_orbit_generators_carve_out_automorphism_orbits(request, name):
    structure = request.getfixturevalue(name)
    for k in (1, 2):
        for orbit in automorphism_orbits(structure, k):
            generator = extract_orbit_generator(structure, orbit[0])
            assert sorted(satisfying_tuples(structure, generator, k)) == sorted(orbit)


def test_pi_candidates_are_bounded_by_alpha(path3):
    session_formula = parse_formula("(forall (y) (exists (z) (and (R x1 y) (R y z))))")
    below_two = pi_candidates(path3, 1, 2, sentences=(session_formula,))
    below_three = pi_candidates(path3, 1, 3, sentences=(session_formula,))
    assert all(is_pi(candidate, 1) for candidate in below_two)
    assert format_formula(session_formula) not in {format_formula(c) for c in below_two}
    assert format_formula(session_formula) in {format_formula(c) for c in below_three}
    assert len(below_three) == len(below_two) + 1
    with pytest.raises(PreconditionError):
        pi_candidates(path3, 1, 1)


def test_negated_diagrams_already_isolate_orbits(path3):
    # extra Π_2 candidates never split an orbit the Π_1 ones keep together
    session_formula = parse_formula("(forall (y) (exists (z) (and (R x1 y) (R y z))))")
    for tup in [(0,), (1,), (0, 2), (2, 1)]:
        assert extract_orbit_generator(path3, tup, 2) == extract_orbit_generator(
            path3, tup, 3, sentences=(session_formula,)
        )


def test_orbit_generator_search_budget(path3):
    with pytest.raises(SearchBudgetExhausted) as info:
        extract_orbit_generator(path3, (0,), budget=3)
    assert info.value.frontier


def test_separator_between_path_and_cycle(path3, cycle3):
    phi, psi = diagram_sentence(path3), diagram_sentence(cycle3)
    separator = extract_separator(phi, psi, path3, 2)
    assert is_d_sigma(separator, 2)
    assert Evaluator(path3).evaluate(separator) is Verdict3.TRUE
    assert Evaluator(cycle3).evaluate(separator) is Verdict3.FALSE


def test_separator_needs_disjoint_classes(path3):
    with pytest.raises(PreconditionError):
        extract_separator(TOP, TOP, path3, 2)


def test_d_sigma_scott_sentence_from_a_pair(edge2):
    sigma = diagram_sentence(edge2)
    pi = scott_sentence_from_orbits(edge2, OrbitFamily.build(edge2, 1))
    result = d_sigma_scott_from_pair(edge2, sigma, pi, 2)
    assert is_d_sigma(result, 1)
    assert verify_scott_sentence(result, edge2, 2).ok


def test_d_sigma_pair_must_be_scott_sentences(edge2):
    with pytest.raises(PreconditionError, match="not a Scott sentence"):
        d_sigma_scott_from_pair(edge2, diagram_sentence(edge2), parse_formula("(forall (x) (not (R x x)))"), 2)


def test_separator_must_fit_under_alpha(path3):
    irreflexive = parse_formula("(forall (x) (not (R x x)))")
    universal_source = parse_formula("(forall (x) (exists (y) (forall (z) (R y z))))")
    with pytest.raises(PreconditionError, match="not below alpha=2"):
        extract_separator(irreflexive, universal_source, path3, 2, alpha=2)
    separator = extract_separator(irreflexive, universal_source, path3, 2)
    assert Evaluator(path3).evaluate(separator) is Verdict3.TRUE


def _separates(separator, structure, psi, bound):
    assert Evaluator(structure).evaluate(separator) is Verdict3.TRUE
    for size in range(1, bound + 1):
        for candidate in enumerate_structures(structure.signature, size):
            evaluator = Evaluator(candidate)
            if evaluator.evaluate(psi) is Verdict3.TRUE:
                assert evaluator.evaluate(separator) is Verdict3.FALSE


@pytest.fixture
def loop1(data_dir):
    return load_structure(data_dir / "structures" / "loop1.json")


@pytest.mark.parametrize("bound", [3, pytest.param(4, marks=pytest.mark.slow)])
def test_separator_between_reflexive_and_irreflexive(loop1, data_dir, bound):
    reflexive = parse_formula((data_dir / "formulas" / "reflexive.sexp").read_text())
    irreflexive = parse_formula((data_dir / "formulas" / "irreflexive.sexp").read_text())
    separator = extract_separator(reflexive, irreflexive, loop1, bound)
    sigma_part, pi_part = separator.children
    assert is_sigma(sigma_part, 1)
    assert is_pi(pi_part, 1)
    _separates(separator, loop1, irreflexive, bound)


def test_separator_between_no_sink_and_sink(cycle3):
    no_sink = parse_formula("(forall (x) (exists (y) (R x y)))")
    sink = parse_formula("(exists (x) (forall (y) (not (R x y))))")
    separator = extract_separator(no_sink, sink, cycle3, 3)
    _separates(separator, cycle3, sink, 3)


def test_separator_between_path_and_cycle_diagrams(path3, cycle3):
    cycle = diagram_sentence(cycle3)
    separator = extract_separator(diagram_sentence(path3), cycle, path3, 3)
    _separates(separator, path3, cycle, 3)


@pytest.mark.slow
def test_d_sigma_scott_sentences_across_small_structures(small_digraphs, loop1, path3, cycle3):
    structures = [s for s in small_digraphs if s.size <= 2] + [loop1, path3, cycle3]
    assert len(structures) >= 10
    for structure in structures:
        sigma = diagram_sentence(structure)
        pi = scott_sentence_from_orbits(structure, OrbitFamily.build(structure, 1))
        result = d_sigma_scott_from_pair(structure, sigma, pi, 3)
        assert is_d_sigma(result, 1)
        assert verify_scott_sentence(result, structure, 3).ok


@pytest.mark.slow
def test_orbit_generators_on_every_small_digraph(small_digraphs):
    for structure in small_digraphs:
        maps = [[]]
        for k in range(1, structure.size + 1):
            for orbit in automorphism_orbits(structure, k):
                generator = extract_orbit_generator(structure, orbit[0])
                images = satisfying_tuples(structure, generator, k)
                assert sorted(images) == sorted(orbit)
                maps += [zip(orbit[0], image) for image in images]
        assert check_back_and_forth(FiniteMapFamily.of(maps), structure, structure)
