import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from shapescript.model import Part


@pytest.fixture
def rng():
    return random.Random(1234)


def random_part(rng, label: str = "") -> Part:
    dims = tuple(rng.uniform(0.05, 1.0) for _ in range(3))
    center = tuple(rng.uniform(-1.0, 1.0) for _ in range(3))
    return Part(label, dims, center)
