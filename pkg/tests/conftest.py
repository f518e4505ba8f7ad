import pytest
from hypothesis import settings, HealthCheck

import germdeform as gd

settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def quad_germ():
    # 2z + z^2 on its auto-sized disk
    return gd.Germ.create([2, 1])


@pytest.fixture(scope="session")
def quad_germ_wide():
    # same map on the big census disk
    return gd.Germ.create([2, 1], radius_U=3)


@pytest.fixture(scope="session")
def repelling_fixed(quad_germ):
    cycles = gd.find_cycles(quad_germ, 1)
    return [c for c in cycles if c.kind == "repelling"][0]


@pytest.fixture(scope="session")
def chart(quad_germ, repelling_fixed):
    return gd.build_chart(quad_germ, repelling_fixed)
