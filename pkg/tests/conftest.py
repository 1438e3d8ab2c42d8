import numpy as np
import pytest

from neckflow.verifier import HierarchyCache


@pytest.fixture(scope="session")
def cache():
    """Session-wide hierarchy store so criteria share expensive builds."""
    return HierarchyCache()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
