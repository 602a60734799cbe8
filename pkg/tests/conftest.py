import hypothesis
import numpy as np
import pytest
from typer.testing import CliRunner

from app.utils.certify import harvest_minors

np.seterr(all="warn")

hypothesis.settings.register_profile("ci", max_examples=25, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile("ci")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture(scope="session")
def minors_by_n():
    """Mineurs récoltés, mis en cache pour la session"""
    cache = {}

    def get(n):
        if n not in cache:
            cache[n] = harvest_minors(n, seed=0)
        return cache[n]

    return get

