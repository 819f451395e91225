"""
Seeded random streams.

All randomness flows from one master seed. Child streams are derived by key
(record id, epoch, preset index ...) through numpy's SeedSequence spawn keys,
so a stream's output depends only on the seed and the key path, never on
worker count or the order in which streams are created.
"""
import copy
import hashlib
from typing import Sequence, Tuple, Union

import numpy as np

Key = Union[int, str]


def _key_to_int(key: Key) -> int:
    if isinstance(key, (int, np.integer)) and key >= 0:
        return int(key)
    digest = hashlib.blake2b(str(key).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class RngStream:
    """PCG64 stream identified by (seed, key path)"""

    def __init__(self, seed: int, path: Tuple[int, ...] = ()):
        if seed < 0 or seed >= 2 ** 64:
            raise ValueError(f"Seed must be a 64-bit unsigned value, got {seed}")
        self.seed = int(seed)
        self.path = tuple(path)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        self._gen = np.random.Generator(np.random.PCG64(sequence))

    def child(self, *keys: Key) -> "RngStream":
        return RngStream(self.seed, self.path + tuple(_key_to_int(k) for k in keys))

    def clone(self) -> "RngStream":
        """Independent copy positioned at the same point of the sequence"""
        twin = RngStream.__new__(RngStream)
        twin.seed = self.seed
        twin.path = self.path
        twin._gen = copy.deepcopy(self._gen)
        return twin

    def uniform(self, low: float, high: float) -> float:
        return float(self._gen.uniform(low, high))

    def integer(self, low: int, high: int) -> int:
        """Uniform integer in the closed range [low, high]"""
        return int(self._gen.integers(low, high, endpoint=True))

    def choice(self, options: Sequence):
        return options[int(self._gen.integers(0, len(options)))]

    def sample_without_replacement(self, population: int, k: int) -> np.ndarray:
        return np.sort(self._gen.choice(population, size=k, replace=False))

    def random(self, shape=None):
        if shape is None:
            return float(self._gen.random())
        return self._gen.random(shape)

    def uniform_field(self, shape, low: float = -1.0, high: float = 1.0) -> np.ndarray:
        return self._gen.uniform(low, high, size=shape)

    def normal(self, sigma: float, shape) -> np.ndarray:
        return self._gen.normal(0.0, sigma, size=shape)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, path={self.path})"
