import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import Courtroom, build_courtroom  # noqa: E402


@pytest.fixture
def courtroom() -> Courtroom:
    return build_courtroom()
