import os
import tempfile

# settings, logs and caches of the test session stay out of the user's home
os.environ["PSG_HOME"] = tempfile.mkdtemp(prefix="psg_test_home_")
os.environ.pop("PSG_CACHE_DIR", None)

import hypothesis
import numpy as np
import pytest

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=100, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "fast"))


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def settings_manager(tmp_path):
    from src.core.config import ConfigManager
    return ConfigManager(str(tmp_path / "home"))


@pytest.fixture
def cache_store(tmp_path):
    from src.storage.cache_store import CacheStore
    return CacheStore(tmp_path / "cache")


@pytest.fixture
def c_11_10():
    from src.core.ps_core import make_exponent
    return make_exponent(11, 10)


@pytest.fixture
def c_3_2():
    from src.core.ps_core import make_exponent
    return make_exponent(3, 2)
