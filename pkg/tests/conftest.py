import pytest

from corrlearn.bench import SWEEP_PLANNER
from corrlearn.envgen import GenConfig, generate_environment


@pytest.fixture(scope="session")
def fast_gen() -> GenConfig:
    """Generation config with the quick sweep planner profile."""
    return GenConfig(planner=SWEEP_PLANNER)


@pytest.fixture(scope="session")
def small_env(fast_gen):
    """A two-type, one-instance environment shared by read-only tests."""
    return generate_environment(2, 1, 42, fast_gen)


@pytest.fixture(scope="session")
def single_type_env(fast_gen):
    """One obstacle near the straight line, so learning visibly moves the cost."""
    return generate_environment(1, 1, 12, fast_gen)
