"""
Word algebra over k generators.

A word is a tuple of nonzero integers: ``i`` stands for generator ``i`` and
``-i`` for its inverse (generators are numbered from 1). Enumerations run in
shortlex order over the alphabet ``1, -1, 2, -2, ...`` and only produce freely
reduced words, so index ``n`` of a family always names the same word.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple

from .syntax import App, Const, Term, tuple_vars

Word = Tuple[int, ...]
RootPair = Tuple[int, Tuple[int, ...]]

MULTIPLY = "*"
INVERSE = "inv"
IDENTITY = "e"


def free_reduce(word: Sequence[int]) -> Word:
    stack: List[int] = []
    for letter in word:
        if letter == 0:
            raise ValueError("0 is not a generator letter")
        if stack and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(int(letter))
    return tuple(stack)


def inverse_word(word: Sequence[int]) -> Word:
    return tuple(-letter for letter in reversed(word))


def alphabet(k: int) -> Tuple[int, ...]:
    return tuple(letter for i in range(1, k + 1) for letter in (i, -i))


def reduced_words(k: int, max_length: Optional[int] = None) -> Iterator[Word]:
    """Freely reduced words over k generators in shortlex order, empty word first."""
    yield ()
    if k == 0:
        return
    letters = alphabet(k)
    layer: List[Word] = [()]
    length = 0
    while max_length is None or length < max_length:
        layer = [word + (letter,) for word in layer for letter in letters if not word or word[-1] != -letter]
        length += 1
        yield from layer


def count_reduced_words(k: int, max_length: int) -> int:
    """Number of reduced words of length at most ``max_length``, empty word included."""
    if k == 0:
        return 1
    return 1 + sum(2 * k * (2 * k - 1) ** (length - 1) for length in range(1, max_length + 1))


class _LazyFamily:
    """Index-addressable prefix of an infinite deterministic enumeration."""

    def __init__(self, source: Iterator):
        self._source = source
        self._items: List = []

    def __getitem__(self, index: int):
        while len(self._items) <= index:
            self._items.append(next(self._source))
        return self._items[index]


@lru_cache(maxsize=16)
def _word_family(k: int) -> _LazyFamily:
    return _LazyFamily(reduced_words(k))


@lru_cache(maxsize=16)
def _root_family(k: int) -> _LazyFamily:
    return _LazyFamily(root_pairs(k))


def word_at(k: int, index: int) -> Word:
    if k == 0 and index > 0:
        raise IndexError("Only the empty word exists over zero generators")
    return _word_family(k)[index]


def root_pairs(k: int) -> Iterator[RootPair]:
    """
    Pairs ``(n, m)`` with ``n >= 2``, ``m`` an integer vector of length k and
    ``gcd(n, *m) == 1``, ordered by height ``n + sum(|m_i|)`` and then
    lexicographically.
    """
    for height in itertools.count(3):
        for n in range(2, height + 1):
            rest = height - n
            vectors = sorted(
                vector
                for vector in itertools.product(range(-rest, rest + 1), repeat=k)
                if sum(abs(value) for value in vector) == rest
            )
            for vector in vectors:
                if math.gcd(n, *vector) == 1:
                    yield n, vector


def root_pair_at(k: int, index: int) -> RootPair:
    return _root_family(k)[index]


def power_word(letter: int, exponent: int) -> Word:
    return (letter if exponent > 0 else -letter,) * abs(exponent)


def monomial_word(exponents: Sequence[int]) -> Word:
    """``x1^m1 x2^m2 ...`` as a word."""
    return tuple(letter for i, m in enumerate(exponents, start=1) for letter in power_word(i, m))


def word_term(word: Sequence[int], terms: Sequence[Term]) -> Term:
    """Left-nested product term of ``word`` with letter ``i`` read as ``terms[i-1]``."""
    result: Optional[Term] = None
    for letter in word:
        base = terms[abs(letter) - 1]
        factor = base if letter > 0 else App(INVERSE, (base,))
        result = factor if result is None else App(MULTIPLY, (result, factor))
    return Const(IDENTITY) if result is None else result


def format_word(word: Sequence[int], names: Optional[Sequence[str]] = None) -> str:
    if not word:
        return "1"
    names = names or tuple_vars(max(abs(letter) for letter in word))
    return " ".join(names[abs(letter) - 1] + ("" if letter > 0 else "^-1") for letter in word)
