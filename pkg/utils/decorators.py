from functools import wraps
import hashlib
import logging
import time

import numpy as np

from entity.cachable import Cachable
from entity.config import Config
from entity.pickle_cache import PickleCache


logger = logging.getLogger(__name__)


def to_complex_array(*arg_nums):
    """
    A decorator converting the specified positional arguments to complex
    numpy arrays, so callers may pass lists, real arrays or scalars.

    Args:
        *arg_nums (int): Positions of the arguments to convert.

    Returns:
        function: A wrapper converting the arguments before calling the
                  original function.

    Example:
        @to_complex_array(0, 1)
        def detect(y, h, noise_var):
            pass

        Here y and h arrive as complex ndarrays; noise_var is untouched.
    """
    def inner_to_complex_array(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            new_args = [
                np.asarray(arg, dtype=complex) if i in arg_nums else arg
                for i, arg in enumerate(args)
            ]
            return func(*new_args, **kwargs)

        return wrapper

    return inner_to_complex_array


def _hash_arg(arg) -> str:
    if isinstance(arg, Cachable):
        return arg.get_hash()
    if isinstance(arg, np.random.Generator):
        return str(arg.bit_generator.state)
    return str(arg)


def cache(name: str):
    """
    A decorator that caches the result of a function in a named PickleCache.

    Args:
        name (str): The name of the cache to use.

    Returns:
        function: The decorated function with caching enabled.

    The key hashes the function name and its arguments: Cachable arguments
    contribute get_hash(), numpy Generators their bit-generator state, and
    everything else str(). Caching is bypassed when `cache.active` is false.

    Example:
        @cache('datasets')
        def get_dataset(self, n_samples, seed):
            pass
    """
    def inner_cache(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            if not Config.get_singleton().is_cache_active:
                return func(*args, **kwargs)
            hashed_args = [func.__name__]
            hashed_args += [_hash_arg(arg) for arg in list(args) + list(kwargs.values())]
            hash_key = hashlib.sha256("".join(hashed_args).encode()).hexdigest()
            pickle_cache = PickleCache.get_instance(name)
            if pickle_cache.has(hash_key):
                logger.warning(f"Using cached {func.__name__} result from '{name}'")
                return pickle_cache.get(hash_key)
            result = func(*args, **kwargs)
            pickle_cache.set(hash_key, result)
            return result

        return wrapper

    return inner_cache


def timed(func):
    """
    Logs the wall time of every call at debug level.
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        result = func(*args, **kwargs)
        logger.debug(f"{func.__name__} took {time.perf_counter() - start:.3f} s")
        return result

    return wrapper
