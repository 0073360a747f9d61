import pytest
from hypothesis import HealthCheck, settings

from refstable.specfun import AlphaParams

# special-function evaluation is slow on first call (coefficient caches);
# wall-clock deadlines would make property tests flaky
settings.register_profile(
    "numerics",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numerics")


@pytest.fixture(scope="session")
def params():
    return AlphaParams(1.5)
