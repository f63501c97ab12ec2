import sys
from pathlib import Path

import pytest

PROJECT_ROOT = Path(__file__).resolve().parent.parent
SCRIPTS_DIR = PROJECT_ROOT / "scripts"
for path in (PROJECT_ROOT, SCRIPTS_DIR):
    if str(path) not in sys.path:
        sys.path.insert(0, str(path))

from scottlab.structures import enumerate_structures, isomorphism_classes, load_structure  # noqa: E402

DATA_DIR = PROJECT_ROOT / "data"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def path3():
    return load_structure(DATA_DIR / "structures" / "path3.json")


@pytest.fixture
def cycle3():
    return load_structure(DATA_DIR / "structures" / "cycle3.json")


@pytest.fixture
def edge2():
    return load_structure(DATA_DIR / "structures" / "edge2.json")


@pytest.fixture
def pointed2():
    return load_structure(DATA_DIR / "structures" / "pointed2.json")


@pytest.fixture(scope="session")
def small_digraphs():
    """One structure per isomorphism type of directed graphs with loops, sizes 1..3."""
    signature = load_structure(DATA_DIR / "structures" / "path3.json").signature
    representatives = []
    for size in range(1, 4):
        structures = list(enumerate_structures(signature, size))
        representatives += [structures[members[0]] for members in isomorphism_classes(structures)]
    return representatives
