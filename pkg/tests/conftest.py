import pytest

import renewal as rw

# Session-scoped curves at the default step: several test modules and the
# acceptance gate evaluate the same four, and a solve is the expensive part.


@pytest.fixture(scope="session")
def identity_curve():
    return rw.solve(rw.Identity(), 10.0)


@pytest.fixture(scope="session")
def logproduct_curve():
    return rw.solve(rw.LogProduct(), 10.0)


@pytest.fixture(scope="session")
def power2_curve():
    return rw.solve(rw.Power(2.0), 10.0)


@pytest.fixture(scope="session")
def power05_curve():
    return rw.solve(rw.Power(0.5), 10.0)
