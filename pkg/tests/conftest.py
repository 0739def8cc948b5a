import numpy as np
import pytest
from hypothesis import settings

import acceptance_log
from dbrn.episodes import generate_toy_dataset

settings.register_profile("ci", max_examples=200, deadline=None)
settings.register_profile("fast", max_examples=20, deadline=None)
settings.load_profile("ci")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def toy_small():
    return generate_toy_dataset(seed=3, num_classes=6, samples_per_class=8, resolution=84)


@pytest.fixture(scope="session")
def toy_full():
    return generate_toy_dataset(seed=0, num_classes=20, samples_per_class=50, resolution=84)


def pytest_terminal_summary(terminalreporter):
    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)
