"""Keyed random substreams.

Every logical stream (pair emission, noise, channel thinning, each detector)
draws from its own Philox generator keyed by ``(seed, stream name)``.  Philox
is counter based, so streams are independent and adding a new named stream
never shifts the numbers another stream sees.
"""

import zlib

import numpy as np

__all__ = ["substream", "stream_key"]


def stream_key(name):
    """Stable 32-bit key for a stream name (crc32, platform independent)."""
    return zlib.crc32(str(name).encode("utf-8"))


def substream(seed, *names):
    """Return a ``numpy.random.Generator`` for the substream ``names`` of ``seed``.

    >>> a = substream(7, "noise").random(3)
    >>> b = substream(7, "noise").random(3)
    >>> bool((a == b).all())
    True
    """
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    entropy = [seed & 0xFFFFFFFF, seed >> 32] + [stream_key(n) for n in names]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
