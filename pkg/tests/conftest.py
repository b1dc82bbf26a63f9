import pytest
from hypothesis import HealthCheck, settings

from obstructkit.seeding import derive_rng

# Dense-matrix examples are slow per case; trade example count for coverage
# of dimensions instead of raw volume, and let individual tests raise it.
settings.register_profile(
    "numerics",
    deadline=None,
    max_examples=30,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("numerics")


@pytest.fixture
def rng():
    """Deterministic per-session generator, independent of the audit streams."""
    return derive_rng(20240817, 9000)
