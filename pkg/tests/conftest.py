import hypothesis
import numpy as np
import pytest

np.seterr(all="warn")

hypothesis.settings.register_profile(
    "default",
    max_examples=20,
    deadline=None,
    derandomize=True,
)
hypothesis.settings.load_profile("default")


def pytest_collection_modifyitems(config, items):
    if config.getoption("-m"):
        return
    # keep the heavy acceptance pipelines last so unit failures surface first
    items.sort(key=lambda it: it.fspath.basename == "test_acceptance.py")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)
