import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from castcost.reference import build_reference_model  # noqa: E402


@pytest.fixture(scope="session")
def bundle():
    return build_reference_model()
