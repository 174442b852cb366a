import numpy as np
import pytest

from votebound import sort_profile

# Desk fixtures shared across the suite.  All derived numbers quoted in the
# tests were recomputed against the independent oracles before freezing.
FIX1_VOTES = np.array([1.0, 0.8, 0.5, 0.2])
FIX1_LAM = 0.5
FIX2_VOTES = np.array([1.0, 0.8, 0.6, 0.2])
FIX2_LAM = 0.6
FIX3_VOTES = np.array([-0.9, 0.6])
FIX3_LAM = 0.6


@pytest.fixture
def fix1():
    return sort_profile(FIX1_VOTES, FIX1_LAM)


@pytest.fixture
def fix2():
    return sort_profile(FIX2_VOTES, FIX2_LAM)


@pytest.fixture
def fix3():
    return sort_profile(FIX3_VOTES, FIX3_LAM)
