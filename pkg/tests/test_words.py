import pytest

from scottlab.syntax import App, Const, Var
from scottlab.words import (
    _root_family,
    _word_family,
    count_reduced_words,
    format_word,
    free_reduce,
    inverse_word,
    monomial_word,
    power_word,
    reduced_words,
    root_pair_at,
    root_pairs,
    word_at,
    word_term,
)


def test_free_reduction_cancels_adjacent_inverses():
    assert free_reduce((1, 2, -2, -1, 3)) == (3,)
    assert free_reduce(()) == ()
    with pytest.raises(ValueError):
        free_reduce((1, 0))


def test_inverse_word():
    assert inverse_word((1, -2)) == (2, -1)


def test_shortlex_enumeration():
    assert list(reduced_words(1, 2)) == [(), (1,), (-1,), (1, 1), (-1, -1)]
    assert list(reduced_words(0)) == [()]


@pytest.mark.parametrize("k, length, expected", [(1, 3, 7), (2, 2, 17), (2, 3, 53), (0, 5, 1)])
def test_counts_match_the_enumeration(k, length, expected):
    assert count_reduced_words(k, length) == expected
    assert len(list(reduced_words(k, length))) == expected


def test_word_indices_are_stable():
    assert word_at(2, 0) == ()
    assert word_at(2, 5) == (1, 1)
    assert word_at(2, 5) == list(reduced_words(2, 2))[5]
    with pytest.raises(IndexError):
        word_at(0, 1)


def test_root_pairs_start_with_square_roots():
    pairs = root_pairs(1)
    assert [next(pairs) for _ in range(4)] == [(2, (-1,)), (2, (1,)), (3, (-1,)), (3, (1,))]


def test_powers_and_monomials():
    assert power_word(2, -3) == (-2, -2, -2)
    assert monomial_word((2, -1)) == (1, 1, -2)


def test_word_terms_are_left_nested():
    x, y = Var("x1"), Var("x2")
    assert word_term((), (x,)) == Const("e")
    assert word_term((1, -2), (x, y)) == App("*", (x, App("inv", (y,))))
    assert word_term((1, 1, 1), (x,)) == App("*", (App("*", (x, x)), x))


def test_format_word():
    assert format_word((1, -2)) == "x1 x2^-1"
    assert format_word(()) == "1"
    assert format_word((-1,), ("a",)) == "a^-1"


def test_word_families_are_cached_per_generator_count():
    _word_family.cache_clear()
    for k in range(40):
        word_at(k, 0)
    assert _word_family.cache_info().maxsize == 16
    assert _word_family.cache_info().currsize == 16
    assert root_pair_at(2, 0) == next(root_pairs(2))
    assert _root_family.cache_info().maxsize == 16
