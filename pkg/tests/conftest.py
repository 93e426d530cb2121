import json
from pathlib import Path

import pytest

FROZEN_PATH = Path(__file__).parent / "oracles" / "frozen_values.json"


@pytest.fixture(scope="session")
def frozen():
    """High-precision reference values produced by oracles/generate.py."""
    return json.loads(FROZEN_PATH.read_text())
