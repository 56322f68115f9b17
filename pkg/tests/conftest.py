import numpy as np
import pytest

from app.services.spectrum_service import extremal_example
from tests.factories import basis, paired


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def zeta4():
    """b_j = 1 at the nontrivial 5th roots of unity."""
    return extremal_example(4)


@pytest.fixture
def basis2():
    return basis("s2", "s3")


@pytest.fixture
def basis3():
    return basis("s2", "s3", "s5")


@pytest.fixture
def independent4(basis2):
    """b = 1 at +-beta_1, +-beta_2: non-degenerate, n = 4."""
    return paired(basis2, [(1, 0, (1, 0)), (1, 0, (0, 1))])


@pytest.fixture
def small_blocks(monkeypatch):
    from app.core.config import settings
    monkeypatch.setattr(settings, "scan_block", 1000)
    return settings
