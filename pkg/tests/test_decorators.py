import numpy as np

from entity.cachable import Cachable
from entity.pickle_cache import PickleCache
from utils.decorators import cache, timed, to_complex_array


class Key(Cachable):

    def __init__(self, value: str):
        self.value = value

    def get_hash(self) -> str:
        return self.value


calls = []


@cache("test")
def expensive(key, n):
    calls.append(n)
    return n * 2


@cache("test")
def draw(key, rng):
    calls.append(key.value)
    return int(rng.integers(1000))


def enable_cache(config, tmp_path):
    config.config["cache"] = {"active": True, "dir": str(tmp_path / "cache")}


def test_to_complex_array():
    @to_complex_array(0, 2)
    def kinds(a, b, c):
        return a, b, c

    a, b, c = kinds([1, 2], [1, 2], 3.0)
    assert a.dtype == complex and c.dtype == complex
    assert isinstance(b, list)


def test_cache_inactive_by_default():
    calls.clear()
    expensive(Key("a"), 1)
    expensive(Key("a"), 1)
    assert calls == [1, 1]


def test_cache_hit(config, tmp_path):
    enable_cache(config, tmp_path)
    calls.clear()
    assert expensive(Key("a"), 2) == 4
    assert expensive(Key("a"), 2) == 4
    assert expensive(Key("b"), 2) == 4
    assert calls == [2, 2]
    assert (tmp_path / "cache" / "test.pkl").exists()


def test_cache_persists(config, tmp_path):
    enable_cache(config, tmp_path)
    calls.clear()
    expensive(Key("a"), 3)
    PickleCache.reset()
    expensive(Key("a"), 3)
    assert calls == [3]


def test_cache_keys_generator_state(config, tmp_path):
    enable_cache(config, tmp_path)
    calls.clear()
    first = draw(Key("a"), np.random.default_rng(1))
    assert draw(Key("a"), np.random.default_rng(1)) == first
    draw(Key("a"), np.random.default_rng(2))
    assert len(calls) == 2


def test_timed_returns_result():
    @timed
    def add(a, b):
        return a + b

    assert add(1, 2) == 3
    assert add.__name__ == "add"
