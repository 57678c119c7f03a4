"""Deterministic seeding with named substreams.

Generators are derived through :class:`numpy.random.SeedSequence`, so a given
``(seed, stream_id)`` pair always yields the same bit stream no matter how the
surrounding work is scheduled.  Normal variates come from numpy's PCG64 +
ziggurat combination, which is fixed per numpy release.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class RngSeed:
    """Root seed plus a substream identifier.

    Identical ``(seed, stream_id)`` pairs produce bit-identical draws.
    Parallel workloads should derive one child generator per task with
    :meth:`child_generator` instead of sharing a generator.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise DomainError("seed must be a 64-bit unsigned integer")
        if int(self.stream_id) < 0:
            raise DomainError("stream_id must be non-negative")

    def generator(self) -> np.random.Generator:
        """Generator for this stream."""
        return self.child_generator()

    def child_generator(self, *path: int) -> np.random.Generator:
        """Generator for a named substream below this stream.

        ``path`` indexes nested replication loops (replicate, bootstrap
        draw, series term, ...); distinct paths give independent streams.
        """
        ss = np.random.SeedSequence(
            entropy=int(self.seed), spawn_key=(int(self.stream_id), *map(int, path))
        )
        return np.random.Generator(np.random.PCG64(ss))
