"""
Ordinals below omega^omega
--------------------------

Ranks of formula classes are kept in Cantor normal form: a tuple of
``(exponent, coefficient)`` pairs with strictly descending exponents and
positive coefficients. The empty tuple is 0. Because exponents are naturals,
comparing two normal forms lexicographically is exactly ordinal comparison.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering
from typing import Tuple, Union

from .errors import OrdinalOverflowError

_TERM_RE = re.compile(r"^(?:w(?:\^(\d+))?(?:\*(\d+))?|(\d+))$")


@total_ordering
@dataclass(frozen=True)
class Ordinal:
    terms: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        previous = None
        for exponent, coefficient in self.terms:
            if exponent < 0 or coefficient < 1:
                raise OrdinalOverflowError(f"Invalid Cantor normal form term ({exponent}, {coefficient})")
            if previous is not None and exponent >= previous:
                raise OrdinalOverflowError("Cantor normal form exponents must strictly descend")
            previous = exponent

    @classmethod
    def of(cls, value: Union[int, "Ordinal"]) -> "Ordinal":
        if isinstance(value, Ordinal):
            return value
        if value < 0:
            raise OrdinalOverflowError(f"Negative rank {value}")
        return cls(((0, value),)) if value else cls()

    @classmethod
    def omega(cls) -> "Ordinal":
        return cls(((1, 1),))

    @classmethod
    def parse(cls, text: str) -> "Ordinal":
        """Read forms like ``0``, ``3``, ``w``, ``w^2*3+w+1``."""
        text = text.replace(" ", "")
        if not text:
            raise OrdinalOverflowError("Empty ordinal")
        total = cls()
        for part in text.split("+"):
            match = _TERM_RE.match(part)
            if not match:
                raise OrdinalOverflowError(f"Cannot read ordinal term '{part}' (ranks must stay below w^w)")
            exponent, coefficient, finite = match.groups()
            if finite is not None:
                total = total + cls.of(int(finite))
            else:
                term = (int(exponent) if exponent else 1, int(coefficient) if coefficient else 1)
                total = total + cls((term,))
        return total

    @property
    def is_finite(self) -> bool:
        return all(exponent == 0 for exponent, _ in self.terms)

    @property
    def as_int(self) -> int:
        if not self.is_finite:
            raise OrdinalOverflowError(f"{self} is not a natural number")
        return self.terms[0][1] if self.terms else 0

    def successor(self) -> "Ordinal":
        return self + Ordinal.of(1)

    def __add__(self, other: Union[int, "Ordinal"]) -> "Ordinal":
        other = Ordinal.of(other)
        if not other.terms:
            return self
        lead = other.terms[0][0]
        kept = [term for term in self.terms if term[0] > lead]
        same = [term for term in self.terms if term[0] == lead]
        merged = list(other.terms)
        if same:
            merged[0] = (lead, same[0][1] + merged[0][1])
        return Ordinal(tuple(kept + merged))

    def __lt__(self, other: Union[int, "Ordinal"]) -> bool:
        return self.terms < Ordinal.of(other).terms

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = Ordinal.of(other)
        if not isinstance(other, Ordinal):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exponent, coefficient in self.terms:
            if exponent == 0:
                parts.append(str(coefficient))
                continue
            base = "w" if exponent == 1 else f"w^{exponent}"
            parts.append(base if coefficient == 1 else f"{base}*{coefficient}")
        return "+".join(parts)
