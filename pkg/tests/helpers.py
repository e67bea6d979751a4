import functools
import random

import numpy as np
import pytest

from rewind.backends import HardwareKeysBackend, PortableBackend, RecordingBackend, hardware_available
from rewind.config import KIB, MIB, Settings


def deterministic_test(seed):
    """Function wrapper to set a fixed seed.
    Arguments
    ---------
    seed: int

    Returns
    -------
        func: callable
            A function wrapping the input function.
    """

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            np.random.seed(np.array(seed, dtype=np.int64))
            random.seed(seed)
            return func(*args, **kwargs)

        return wrapper

    return decorator


def make_backend(name: str):
    if name == "record":
        return RecordingBackend()
    if name == "portable":
        return PortableBackend()
    if not hardware_available():
        pytest.skip("protection keys are not available on this machine")
    return HardwareKeysBackend()


def make_settings(backend: str = "record", **overrides) -> Settings:
    fields = dict(backend=backend, stack_bytes=64 * KIB, arena_bytes=1 * MIB)
    fields.update(overrides)
    return Settings(**fields)
