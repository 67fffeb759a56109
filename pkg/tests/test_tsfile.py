import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import stream
from qicorr.tsfile import (
    HEADER,
    MAGIC,
    RECORD,
    TimestampFileError,
    decode,
    encode,
    read_csv,
    read_timestamps,
    write_csv,
    write_timestamps,
)

sorted_ticks = st.lists(st.integers(0, 2**63 - 1), max_size=50).map(sorted)


@settings(max_examples=200, deadline=None)
@given(sorted_ticks, sorted_ticks)
def test_round_trip(a, b):
    s0, s1 = stream(a, channel=0), stream(b, channel=1)
    f = decode(encode([s0, s1], channel_count=2))
    assert f.tick_ps == 81 and f.channel_count == 2
    assert np.array_equal(f.stream(0).ticks, s0.ticks)
    assert np.array_equal(f.stream(1).ticks, s1.ticks)
    assert f.stream(1).tick == pytest.approx(81e-12)


def test_layout():
    data = encode([stream([3], channel=1), stream([3, 7], channel=0)])
    assert data[:4] == MAGIC and len(data) == HEADER.size + 3 * RECORD.itemsize
    assert HEADER.size == 11 and RECORD.itemsize == 9
    f = decode(data)
    assert f.ticks.tolist() == [3, 3, 7] and f.channels.tolist() == [0, 1, 0]


def test_file_round_trip(tmp_path):
    p = tmp_path / "x.qits"
    write_timestamps(p, [stream([1, 2, 3])], channel_count=4)
    f = read_timestamps(p)
    assert f.channel_count == 4 and len(f.stream(3).ticks) == 0
    assert f.stream(0, duration_ticks=100).duration_ticks == 100


def test_empty_file_body():
    f = decode(encode([stream([])], channel_count=2))
    assert len(f.ticks) == 0 and f.stream(0).duration_ticks == 0


def _good():
    return bytearray(encode([stream([1, 5], channel=0), stream([2], channel=1)]))


@pytest.mark.parametrize(
    "mutate, offset",
    [
        (lambda d: d.__setitem__(slice(0, 4), b"XXXX"), 0),
        (lambda d: d.__setitem__(slice(4, 6), (2).to_bytes(2, "little")), 4),
        (lambda d: d.__setitem__(slice(6, 10), bytes(4)), 6),
        (lambda d: d.__setitem__(10, 0), 10),
        (lambda d: d.__delitem__(slice(-3, None)), 11 + 2 * 9),
        (lambda d: d.__setitem__(11 + 8, 9), 11 + 8),
        (lambda d: d.__setitem__(slice(11 + 18, 11 + 26), (0).to_bytes(8, "little")), 11 + 18),
    ],
)
def test_corrupt_files_report_offset(mutate, offset):
    data = _good()
    mutate(data)
    with pytest.raises(TimestampFileError) as info:
        decode(bytes(data))
    assert info.value.offset == offset


def test_truncated_header():
    with pytest.raises(TimestampFileError):
        decode(b"QIT")


def test_encode_checks():
    with pytest.raises(ValueError):
        encode([])
    with pytest.raises(ValueError):
        encode([stream([1], tick=81e-12), stream([1], channel=1, tick=1e-12)])


def test_csv_round_trip(tmp_path):
    rows = [{"x": 0.1, "n": 3, "g": float("nan")}, {"x": 1e-20, "n": 0, "g": 2.5}]
    p = tmp_path / "a.csv"
    write_csv(p, rows, ["x", "n", "g"])
    text = p.read_text()
    assert text.splitlines()[0] == "x,n,g" and "0.1,3,nan" in text
    cols = read_csv(p, required=["x", "n"])
    assert cols["x"].tolist() == [0.1, 1e-20]
    assert np.isnan(cols["g"][0])


@pytest.mark.parametrize("text", ["", "x,y\n1\n", "x,y\n1,abc\n"])
def test_csv_schema_errors(tmp_path, text):
    p = tmp_path / "b.csv"
    p.write_text(text)
    with pytest.raises(TimestampFileError):
        read_csv(p)


def test_csv_missing_column():
    with pytest.raises(TimestampFileError, match="counts"):
        read_csv("x\n1\n", required=["x", "counts"])
