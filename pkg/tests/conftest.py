import json

import numpy as np
import pytest

from entity.config import Config, ROOT_DIR
from entity.pickle_cache import PickleCache


def pytest_addoption(parser):
    parser.addoption("--run-acceptance", action="store_true", default=False,
        help="run the long statistical acceptance criteria")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-acceptance"):
        return
    skip = pytest.mark.skip(reason="needs --run-acceptance")
    for item in items:
        if "acceptance" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(autouse=True)
def config(tmp_path, monkeypatch) -> Config:
    with open(ROOT_DIR / "config" / "config.json") as f:
        data = json.load(f)
    data["cache"] = {"active": False, "dir": str(tmp_path / "cache")}
    data["logging"]["file"] = str(tmp_path / "mpps.log")
    data["styles"]["active"] = False
    path = tmp_path / "config.json"
    with open(path, "w") as f:
        json.dump(data, f)
    monkeypatch.delenv("MPPS_SEED", raising=False)
    Config.reset()
    PickleCache.reset()
    Config.instance = Config(str(path))
    yield Config.instance
    Config.reset()
    PickleCache.reset()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)
