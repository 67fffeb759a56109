import numpy as np
import pytest

from qicorr.detector import TimestampStream

TICK = 81e-12


def stream(ticks, channel=0, duration=None, tick=TICK):
    ticks = np.sort(np.asarray(ticks, dtype=np.uint64))
    if duration is None:
        duration = int(ticks[-1]) + 1 if len(ticks) else 1
    return TimestampStream(ticks, channel, duration, tick)


@pytest.fixture
def make_stream():
    return stream
