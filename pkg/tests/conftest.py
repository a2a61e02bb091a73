import pytest
from hypothesis import HealthCheck, settings

from opfractal import sample_batch

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def big_batch():
    """10**6 points at depth 30, seed 0; shared because it takes a fraction of a second."""
    return sample_batch(0.25, 30, 10**6, seed=0)
