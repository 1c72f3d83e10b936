"""Counter-based, splittable seeding.

Every random draw in the package is a pure function of a master seed, a
stream path and a draw index.  Streams are keyed Philox generators: the key
is a hash of ``(master, *path)`` and the counter starts at zero, so a stream
never depends on what other streams have consumed or on worker scheduling.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

__all__ = ["SeedSpec", "as_seed"]

_MASK64 = (1 << 64) - 1


def _stream_key(master: int, path: tuple) -> np.ndarray:
    h = hashlib.blake2b(digest_size=16)
    h.update(int(master & _MASK64).to_bytes(8, "little"))
    for label in path:
        token = repr(label).encode()
        h.update(len(token).to_bytes(4, "little"))
        h.update(token)
    d = h.digest()
    return np.array([int.from_bytes(d[:8], "little"),
                     int.from_bytes(d[8:], "little")], dtype=np.uint64)


@dataclass(frozen=True)
class SeedSpec:
    """A node in the stream tree: ``master`` plus a path of labels."""

    master: int
    path: tuple = ()

    def child(self, *labels) -> "SeedSpec":
        return SeedSpec(self.master, self.path + tuple(labels))

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at draw index 0 of this stream."""
        return np.random.Generator(np.random.Philox(key=_stream_key(self.master, self.path)))

    def __str__(self) -> str:
        return ":".join([str(self.master), *map(str, self.path)])


def as_seed(seed) -> SeedSpec:
    """Coerce an int, a SeedSpec or None (master 0) into a SeedSpec."""
    if isinstance(seed, SeedSpec):
        return seed
    if seed is None:
        return SeedSpec(0)
    if isinstance(seed, (int, np.integer)):
        return SeedSpec(int(seed))
    raise TypeError(f"cannot interpret {seed!r} as a seed")
