import pytest

from scottlab.errors import SignatureMismatchError
from scottlab.games import (
    back_and_forth_equivalent,
    duplicator_wins,
    greatest_back_and_forth_family,
    is_partial_isomorphism,
    partial_isomorphisms,
)


def test_partial_isomorphisms_preserve_edges(path3, cycle3):
    assert is_partial_isomorphism(path3, cycle3, ((0, 0), (1, 1)))
    assert not is_partial_isomorphism(path3, cycle3, ((0, 1), (1, 0)))
    assert not is_partial_isomorphism(path3, cycle3, ((0, 0), (1, 0)))


def test_partial_isomorphisms_respect_constants(pointed2):
    assert is_partial_isomorphism(pointed2, pointed2, ((0, 0),))
    assert not is_partial_isomorphism(pointed2, pointed2, ((0, 1),))


def test_empty_map_is_always_listed(path3, cycle3):
    assert partial_isomorphisms(path3, cycle3)[0] == ()


def test_one_round_cannot_tell_path_from_cycle(path3, cycle3):
    assert duplicator_wins(path3, cycle3, 1)
    assert not duplicator_wins(path3, cycle3, 2)


def test_back_and_forth_separates_non_isomorphic_structures(path3, cycle3):
    assert not back_and_forth_equivalent(path3, cycle3)
    assert back_and_forth_equivalent(cycle3, cycle3.relabel((1, 2, 0)))


def test_greatest_family_of_a_cycle_holds_its_rotations(cycle3):
    family = greatest_back_and_forth_family(cycle3, cycle3)
    assert ((0, 1), (1, 2), (2, 0)) in family
    assert ((0, 1), (1, 0), (2, 2)) not in family


def test_games_need_matching_signatures(path3, pointed2):
    with pytest.raises(SignatureMismatchError):
        duplicator_wins(path3, pointed2, 1)
