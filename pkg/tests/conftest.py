import json

import pytest

from app.services.sampling import random_ensemble
from app.services.shielded import example_4x4, horodecki_family

ENSEMBLE_SEED = 20240917


@pytest.fixture(scope="session")
def random_states():
    """10⁴ seeded random states on a 2x2 shield; every second one has σ1 ⊥ σ2."""
    return random_ensemble(ENSEMBLE_SEED, 10_000)


@pytest.fixture(scope="session")
def few_random_states(random_states):
    return random_states[:100]


@pytest.fixture
def example_state():
    return example_4x4(0.6, 0.4)


@pytest.fixture
def horodecki_state():
    return horodecki_family(0.4, 2, 1)


@pytest.fixture
def write_spec(tmp_path):
    """Write a state-spec document and return its path as a string."""
    def _write(doc, name="spec.json"):
        path = tmp_path / name
        path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(path)
    return _write
