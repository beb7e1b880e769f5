"""Seeding helpers.

Every stochastic operation in the package takes an explicit seed (an int or a
ready ``numpy.random.Generator``).  Derived streams are produced by hashing the
master seed together with string labels, so any sub-computation can be
reproduced in isolation and the derivation is independent of execution order
or worker count.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import DomainError


def derive_seed(master: int, *labels) -> int:
    """Derive a child seed from a master seed and a label path."""
    payload = repr((int(master),) + tuple(labels)).encode("utf-8")
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def make_rng(seed) -> np.random.Generator:
    """Turn an int seed into a Generator; pass Generators through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        raise DomainError("an explicit seed is required for stochastic operations")
    return np.random.default_rng(int(seed))


class UniformStream:
    """Buffered supply of uniform(0,1) floats drawn from one generator.

    Scalar draws through ``Generator.random()`` dominate tight sampling loops;
    pulling blocks and handing out plain Python floats is several times faster
    while consuming the generator stream in the identical order.
    """

    __slots__ = ("_rng", "_block", "_buf", "_pos")

    def __init__(self, rng: np.random.Generator, block: int = 1 << 15):
        self._rng = rng
        self._block = block
        self._buf = rng.random(block).tolist()
        self._pos = 0

    def next(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self._rng.random(self._block).tolist()
            self._pos = 0
        value = self._buf[self._pos]
        self._pos += 1
        return value
