import pytest
from hypothesis import HealthCheck, settings

from ldpselect import DiscreteDistribution, HypothesisSet

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture
def point_mass_triple() -> HypothesisSet:
    """The three point masses on a 3-point domain; every edge is hand-checkable."""
    return HypothesisSet(tuple(DiscreteDistribution.point_mass(i, 3) for i in (1, 2, 3)))
