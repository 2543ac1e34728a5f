import os
import sys

import pytest
from hypothesis import HealthCheck, settings

TEST_DIR = os.path.dirname(os.path.abspath(__file__))

# Add the project root to sys.path so that src can be imported
sys.path.insert(0, os.path.abspath(os.path.join(TEST_DIR, "..")))

FIXTURES_DIR = os.path.abspath(os.path.join(TEST_DIR, "..", "fixtures"))

# Property tests evaluate jets and integrate ODEs per example
settings.register_profile("fast", max_examples=20, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture
def fixtures_dir():
    return FIXTURES_DIR
