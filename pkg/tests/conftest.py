"""Suite-wide fixtures."""

import pytest

from support import make_world, random_pose, small_settings


@pytest.fixture
def pasture_world():
    return make_world(seed=7, n_objects=6)


@pytest.fixture
def steep_pose():
    return random_pose(seed=7)


@pytest.fixture
def low_settings():
    return small_settings()
