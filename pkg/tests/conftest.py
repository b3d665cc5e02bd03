"""
Shared test configuration and fixtures for all apps.
"""
import numpy as np
import pytest

from core.tests.factories import SampleFactory
from experiments.tests.factories import HigherOrderSpecFactory
from risk.chains import domain_clips


@pytest.fixture
def rng():
    """Provide a seeded generator."""
    return np.random.default_rng(20240607)


@pytest.fixture
def normal_sample():
    """Create a sample of 100 draws from N(10, 3) with variance 3."""
    return SampleFactory(n_obs=100, spread=np.sqrt(3.0), seed=11)


@pytest.fixture
def higher_order_spec():
    """The higher-order measure with alpha = 0.05 and q = 2."""
    return HigherOrderSpecFactory()


@pytest.fixture(autouse=True)
def reset_domain_clips():
    """Start every test with a zero clip counter."""
    domain_clips.reset()
    yield
    domain_clips.reset()
