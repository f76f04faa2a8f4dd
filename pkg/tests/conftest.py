import hypothesis
import numpy as np
import pytest

from p2nia.data import split
from p2nia.desk import make_desk_data
from p2nia.model import train

hypothesis.settings.register_profile("default", deadline=None, max_examples=100)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10)
hypothesis.settings.load_profile("default")


@pytest.fixture(scope="session")
def desk():
    return make_desk_data(25_000, seed=0)


@pytest.fixture(scope="session")
def desk_split(desk):
    return split(desk, 0.8, seed=0)


@pytest.fixture(scope="session")
def desk_model(desk_split):
    return train(desk_split[0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_DETAIL = pytest.StashKey[dict]()


@pytest.fixture
def verdict(request):
    """Record a one-line detail for the acceptance summary."""
    store = request.config.stash.setdefault(ACCEPTANCE_DETAIL, {})

    def note(text):
        store[request.node.nodeid] = text
        print(text)
    return note


def pytest_terminal_summary(terminalreporter, config):
    details = config.stash.get(ACCEPTANCE_DETAIL, {})
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when == "call" and "test_acceptance.py::" in rep.nodeid:
                name = rep.nodeid.split("::")[-1]
                lines.append((name, outcome.upper()[:4], details.get(rep.nodeid, "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status, detail in sorted(lines):
            terminalreporter.write_line(f"{status}  {name}  {detail}")
