"""Binary timestamp files and CSV figure data.

Timestamp file layout (all little endian)::

    offset  size  field
    0       4     magic b"QITS"
    4       2     version (u16) = 1
    6       4     tick length in picoseconds (u32)
    10      1     channel count (u8)
    11      9*n   records: tick (u64), channel (u8)

Records are written in (tick, channel) order, which keeps every channel
sorted.  The format carries no acquisition length; readers take
``last tick + 1`` unless told otherwise.
"""

import csv
import io
import math
import struct
from dataclasses import dataclass

import numpy as np

from .detector import TimestampStream

__all__ = [
    "MAGIC",
    "VERSION",
    "HEADER",
    "RECORD",
    "TimestampFileError",
    "TimestampFile",
    "encode",
    "decode",
    "write_timestamps",
    "read_timestamps",
    "write_csv",
    "read_csv",
]

MAGIC = b"QITS"
VERSION = 1
HEADER = struct.Struct("<4sHIB")
RECORD = np.dtype([("tick", "<u8"), ("channel", "u1")])  # packed, 9 bytes


class TimestampFileError(ValueError):
    """Malformed timestamp or CSV file; ``offset`` is the byte (or row) position."""

    def __init__(self, message, offset=None):
        where = f" at byte {offset}" if offset is not None else ""
        super().__init__(f"{message}{where}")
        self.offset = offset


@dataclass
class TimestampFile:
    tick_ps: int
    channel_count: int
    ticks: np.ndarray
    channels: np.ndarray

    def stream(self, channel, duration_ticks=None):
        """The clicks of one channel as a :class:`TimestampStream`."""
        if duration_ticks is None:
            duration_ticks = int(self.ticks[-1]) + 1 if len(self.ticks) else 0
        sel = self.ticks[self.channels == channel]
        return TimestampStream(sel, channel, duration_ticks, self.tick_ps * 1e-12)


def _tick_ps(tick):
    ps = tick / 1e-12
    if abs(ps - round(ps)) > 1e-6 * max(1.0, ps):
        raise ValueError(f"tick {tick!r} s is not a whole number of picoseconds")
    return int(round(ps))


def encode(streams, channel_count=None):
    """Serialize timestamp streams to bytes."""
    streams = list(streams)
    if not streams:
        raise ValueError("no streams to write")
    tick_ps = _tick_ps(streams[0].tick)
    for s in streams[1:]:
        if _tick_ps(s.tick) != tick_ps:
            raise ValueError("all streams in a file share one tick length")
    if channel_count is None:
        channel_count = max(s.channel_id for s in streams) + 1
    if not 0 < channel_count <= 255:
        raise ValueError("channel_count must be in 1..255")
    ticks = np.concatenate([np.asarray(s.ticks, dtype=np.uint64) for s in streams])
    chans = np.concatenate([np.full(len(s), s.channel_id, dtype=np.uint8) for s in streams])
    order = np.lexsort((chans, ticks))
    records = np.empty(len(ticks), dtype=RECORD)
    records["tick"] = ticks[order]
    records["channel"] = chans[order]
    return HEADER.pack(MAGIC, VERSION, tick_ps, channel_count) + records.tobytes()


def decode(data):
    """Parse bytes produced by :func:`encode`."""
    data = bytes(data)
    if len(data) < HEADER.size:
        raise TimestampFileError(f"truncated header ({len(data)} of {HEADER.size} bytes)", len(data))
    magic, version, tick_ps, nchan = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise TimestampFileError(f"bad magic {magic!r}, expected {MAGIC!r}", 0)
    if version != VERSION:
        raise TimestampFileError(f"unsupported version {version}", 4)
    if tick_ps == 0:
        raise TimestampFileError("tick length is zero", 6)
    if nchan == 0:
        raise TimestampFileError("channel count is zero", 10)
    body = len(data) - HEADER.size
    if body % RECORD.itemsize:
        offset = HEADER.size + (body // RECORD.itemsize) * RECORD.itemsize
        raise TimestampFileError("truncated record", offset)
    records = np.frombuffer(data, dtype=RECORD, offset=HEADER.size)
    ticks = records["tick"].copy()
    chans = records["channel"].copy()
    bad = np.flatnonzero(chans >= nchan)
    if bad.size:
        offset = HEADER.size + int(bad[0]) * RECORD.itemsize + 8
        raise TimestampFileError(f"channel {chans[bad[0]]} >= channel count {nchan}", offset)
    for ch in range(nchan):
        idx = np.flatnonzero(chans == ch)
        back = np.flatnonzero(ticks[idx][1:] < ticks[idx][:-1])
        if back.size:
            offset = HEADER.size + int(idx[back[0] + 1]) * RECORD.itemsize
            raise TimestampFileError(f"channel {ch} is not sorted", offset)
    return TimestampFile(tick_ps, nchan, ticks, chans)


def write_timestamps(path, streams, channel_count=None):
    with open(path, "wb") as fh:
        fh.write(encode(streams, channel_count))


def read_timestamps(path):
    with open(path, "rb") as fh:
        return decode(fh.read())


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def write_csv(path_or_file, rows, columns):
    """Write dict rows with a header line; floats use their shortest exact repr."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])
    finally:
        if own:
            fh.close()


def read_csv(path_or_text, required=()):
    """Read a numeric CSV into ``{column: float array}``; checks ``required`` columns."""
    if isinstance(path_or_text, str) and "\n" in path_or_text:
        fh = io.StringIO(path_or_text)
    else:
        fh = open(path_or_text, newline="", encoding="utf-8")
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TimestampFileError("empty CSV file") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise TimestampFileError(f"CSV lacks column(s) {', '.join(missing)}")
        cols = {name: [] for name in header}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise TimestampFileError(f"CSV line {lineno} has {len(row)} fields, expected {len(header)}")
            for name, cell in zip(header, row):
                try:
                    cols[name].append(float(cell))
                except ValueError:
                    raise TimestampFileError(f"CSV line {lineno}: {name}={cell!r} is not a number") from None
    return {name: np.asarray(v, dtype=float) for name, v in cols.items()}
