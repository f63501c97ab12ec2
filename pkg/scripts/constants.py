"""
Shared defaults and lookup tables for the scottlab command line and API.
"""

import itertools

from scottlab.errors import EXIT_BUDGET, EXIT_INPUT, EXIT_MISMATCH, EXIT_OK

DEFAULT_MAX_SIZE = 3
DEFAULT_RADIUS = 4
DEFAULT_LENGTH = 3
DEFAULT_DEPTH = 5
DEFAULT_COPIES = 2
DEFAULT_ALPHA = 2
DEFAULT_STEPS = 200

EXIT_CODES = {
    "ok": EXIT_OK,
    "mismatch": EXIT_MISMATCH,
    "input": EXIT_INPUT,
    "budget": EXIT_BUDGET,
}


def _cyclic_table(n):
    return [[(a + b) % n for b in range(n)] for a in range(n)]


def _symmetric_table(n):
    # (a * b)(i) = a(b(i)), elements in itertools.permutations order
    perms = list(itertools.permutations(range(n)))
    index = {perm: position for position, perm in enumerate(perms)}
    return [[index[tuple(a[b[i]] for i in range(n))] for b in perms] for a in perms]


BUNDLED_GROUPS = {
    "Z2": {"kind": "finite-table", "name": "Z/2", "table": _cyclic_table(2)},
    "Z4": {"kind": "finite-table", "name": "Z/4", "table": _cyclic_table(4)},
    "S3": {"kind": "finite-table", "name": "S3", "table": _symmetric_table(3)},
    "Z": {"kind": "fg-abelian", "name": "Z", "invariants": [0]},
    "Z^2": {"kind": "fg-abelian", "name": "Z^2", "invariants": [0, 0]},
    "Z2xZ": {"kind": "fg-abelian", "name": "Z/2 x Z", "invariants": [2, 0]},
    "F2": {"kind": "free", "name": "F2", "rank": 2},
    "Dinf": {"kind": "infinite-dihedral", "name": "D_inf"},
}

# Groups with a documented Π₁ definition of the orbit of their generating tuple.
PI1_ORBIT_GROUPS = ("Z", "Z^2", "Dinf")
