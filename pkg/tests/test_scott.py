import itertools

import pytest

from scottlab.complexity import classify, is_pi
from scottlab.errors import BudgetExceededError, IncompleteFamilyError, UnboundVariableError
from scottlab.games import back_and_forth_equivalent, greatest_back_and_forth_family
from scottlab.scott import (
    FiniteMapFamily,
    OrbitFamily,
    check_back_and_forth,
    diagram_sentence,
    family_from_orbit_formulas,
    guard_formula,
    guarded_orbit_family,
    orbit_formula,
    satisfying_tuples,
    scott_family_sentence,
    scott_sentence_from_orbits,
    verify_scott_sentence,
)
from scottlab.semantics import Evaluator, Verdict3
from scottlab.sexpr import parse_formula
from scottlab.structures import enumerate_structures, isomorphic


def test_orbit_formula_isolates_an_endpoint(path3):
    assert satisfying_tuples(path3, orbit_formula(path3, (0,)), 1) == [(0,)]
    assert satisfying_tuples(path3, orbit_formula(path3, (1, 2)), 2) == [(1, 2)]


def test_orbit_formula_covers_a_rotation_orbit(cycle3):
    assert satisfying_tuples(cycle3, orbit_formula(cycle3, (0, 1)), 2) == [(0, 1), (1, 2), (2, 0)]


def test_repeated_entries_become_equalities(cycle3):
    assert satisfying_tuples(cycle3, orbit_formula(cycle3, (2, 2)), 2) == [(0, 0), (1, 1), (2, 2)]


def test_orbit_families_verify(cycle3, path3):
    assert OrbitFamily.build(cycle3, 2).verify() == []
    assert OrbitFamily.build(path3, 1, covering=False).verify() == []


def test_diagram_sentence_is_sigma2(path3):
    assert str(classify(diagram_sentence(path3))) == "(Sigma, 2)"


def test_missing_orbit_formulas_are_reported(edge2):
    family = OrbitFamily(edge2, {}, 1)
    assert family.missing() == [(0,), (1,)]
    with pytest.raises(IncompleteFamilyError):
        scott_sentence_from_orbits(edge2, family)
    with pytest.raises(IncompleteFamilyError):
        OrbitFamily.build(edge2).formula((0, 0, 0))


def test_edge_scott_sentence_verifies(edge2):
    sentence = scott_sentence_from_orbits(edge2, OrbitFamily.build(edge2))
    assert is_pi(sentence, 3)
    report = verify_scott_sentence(sentence, edge2, 2)
    assert report.ok
    assert not report.missing_class
    assert report.summary() == {"match": 18, "false_positive": 0, "false_negative": 0, "unknown": 0}
    assert report.to_text().startswith("Scott sentence sweep over all structures of size 1..2")


def test_guarded_family_gives_an_equivalent_sentence(edge2):
    assert verify_scott_sentence(scott_family_sentence(edge2), edge2, 2).ok


def test_guarded_family_needs_a_candidate_for_every_tuple(edge2):
    with pytest.raises(IncompleteFamilyError, match="No candidate formula"):
        guarded_orbit_family(edge2, {1: []}, max_length=1)


def test_broken_sentence_is_flagged(path3, data_dir):
    sentence = parse_formula((data_dir / "formulas" / "broken_scott.sexp").read_text())
    report = verify_scott_sentence(sentence, path3, 2)
    assert not report.ok
    assert report.missing_class
    assert report.summary()["false_positive"] > 0
    assert "false_positive" in report.to_text()


def test_sweep_refuses_open_formulas_and_oversized_ranges(edge2):
    with pytest.raises(UnboundVariableError):
        verify_scott_sentence(parse_formula("(R x x)"), edge2, 2)
    with pytest.raises(BudgetExceededError) as info:
        verify_scott_sentence(diagram_sentence(edge2), edge2, 3, ceiling=10)
    assert info.value.count == 530


@pytest.mark.slow
def test_path_scott_sentence_full_sweep(path3):
    sentence = scott_sentence_from_orbits(path3, OrbitFamily.build(path3, 1))
    report = verify_scott_sentence(sentence, path3, 3)
    assert report.ok
    assert report.summary()["match"] == 530


def test_orbit_formulas_give_a_back_and_forth_family(cycle3, path3):
    family = family_from_orbit_formulas(cycle3, cycle3, OrbitFamily.build(cycle3))
    assert family.invalid_maps(cycle3, cycle3) == []
    assert check_back_and_forth(family, cycle3, cycle3)

    across = family_from_orbit_formulas(path3, cycle3, OrbitFamily.build(path3))
    assert across.maps == frozenset({()})
    assert not check_back_and_forth(across, path3, cycle3)


def test_invalid_maps_are_listed(path3, cycle3):
    assert FiniteMapFamily.of([[(0, 1)]]).invalid_maps(path3, cycle3) == []
    assert FiniteMapFamily.of([[(0, 1), (1, 0)]]).invalid_maps(path3, cycle3) == [((0, 1), (1, 0))]
    assert check_back_and_forth(FiniteMapFamily(), path3, cycle3)


def test_maps_that_are_not_partial_isomorphisms_fail_the_check(path3):
    # (0, 1) -> (1, 0) reverses the edge 0 -> 1 of the path
    reversed_edge = FiniteMapFamily.of([[], [(0, 1), (1, 0)]])
    assert reversed_edge.invalid_maps(path3, path3) == [((0, 1), (1, 0))]
    assert not check_back_and_forth(reversed_edge, path3, path3)
    identity = FiniteMapFamily.of([(x, x) for x in subset] for size in range(4) for subset in itertools.combinations(range(3), size))
    assert check_back_and_forth(identity, path3, path3)


def test_guards_switch_a_formula_on_and_off(path3):
    endpoint = orbit_formula(path3, (0,))
    evaluator = Evaluator(path3)
    assert evaluator.evaluate(guard_formula(True, endpoint), {"x1": 0}) is Verdict3.TRUE
    assert evaluator.evaluate(guard_formula(False, endpoint), {"x1": 0}) is Verdict3.FALSE


# ---------------------------------------------------------------------------
# Sweeps over small digraphs
# ---------------------------------------------------------------------------


def _agrees_with_isomorphism(a, b):
    iso = isomorphic(a, b) is not None
    assert back_and_forth_equivalent(a, b) == iso
    assert check_back_and_forth(FiniteMapFamily(greatest_back_and_forth_family(a, b)), a, b)
    return iso


def test_orbit_families_match_isomorphism_on_two_elements(small_digraphs):
    structures = [s for s in small_digraphs if s.size <= 2]
    for a in structures:
        family = OrbitFamily.build(a)
        for b in structures:
            iso = _agrees_with_isomorphism(a, b)
            assert check_back_and_forth(family_from_orbit_formulas(a, b, family), a, b) == iso


@pytest.mark.slow
def test_games_match_isomorphism_on_three_elements(small_digraphs):
    for a, b in itertools.product(small_digraphs, repeat=2):
        _agrees_with_isomorphism(a, b)
        _agrees_with_isomorphism(a, b.relabel(list(reversed(range(b.size)))))


@pytest.mark.slow
def test_orbit_scott_sentences_pick_out_their_structure(small_digraphs):
    assert len(small_digraphs) == 116
    for a in small_digraphs:
        sentence = scott_sentence_from_orbits(a, OrbitFamily.build(a, 1))
        for b in small_digraphs:
            expected = Verdict3.TRUE if b is a else Verdict3.FALSE
            assert Evaluator(b).evaluate(sentence) is expected


@pytest.mark.slow
def test_games_match_isomorphism_on_four_elements(path3):
    sample = list(itertools.islice(enumerate_structures(path3.signature, 4), 0, None, 997))
    for a, b in itertools.product(sample, repeat=2):
        _agrees_with_isomorphism(a, b)
    for a in sample:
        assert _agrees_with_isomorphism(a, a.relabel([2, 0, 3, 1]))
