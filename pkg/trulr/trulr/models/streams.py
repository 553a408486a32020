"""Seeded, independently derivable random streams.

A stream is identified by (seed, stream_id). Its state is derived as
SeedSequence(entropy=seed, spawn_key=(stream_id,)), so the draws of one
stream never depend on how many other streams exist. Children derived with
`spawn` extend the spawn key and are equally reproducible.
"""

from numpy.random import SFC64, Generator, SeedSequence

from trulr.exceptions import InvalidParameterError

UINT64_LIMIT = 2**64


def _check_uint64(name, value):
    value = int(value)
    if not 0 <= value < UINT64_LIMIT:
        raise InvalidParameterError(f"{name} must be a 64-bit unsigned integer")
    return value


class RandomStream:
    """Mutable random source owned by a single worker at a time."""

    def __init__(self, seed: int, stream_id: int = 0, _spawn_key=None):
        self.seed = _check_uint64("seed", seed)
        self.stream_id = _check_uint64("stream_id", stream_id)
        self.spawn_key = (
            tuple(_spawn_key) if _spawn_key is not None else (self.stream_id,)
        )
        sequence = SeedSequence(entropy=self.seed, spawn_key=self.spawn_key)
        self.generator = Generator(SFC64(sequence))

    def spawn(self, *keys: int) -> "RandomStream":
        """Child stream for a sub-task (e.g. one week/option of a replication)."""
        keys = tuple(_check_uint64("spawn key", k) for k in keys)
        return RandomStream(self.seed, self.stream_id, self.spawn_key + keys)

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, key={self.spawn_key})"
