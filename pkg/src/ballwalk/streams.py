"""Deterministic, splittable random number streams.

Every Monte Carlo routine takes an explicit numpy ``Generator``.  Streams are
keyed by (seed, stream_id, ...) on top of the counter-based Philox bit
generator, so stream k produces the same draws no matter which worker consumes
it or in which order streams are created.
"""

import numpy as np


def rng_stream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the stream identified by ``(seed, *key)``.

    Distinct keys give statistically independent streams; equal keys give
    bit-identical draw sequences.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
