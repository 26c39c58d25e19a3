"""Time-tag streams and the HQTT binary container.

HQTT layout (little-endian):
  header, 16 bytes: magic "HQTT", uint16 version (=1), uint16 channel count,
  uint64 event count; then one 9-byte record per event: uint64 timestamp in
  picoseconds followed by uint8 channel id.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import StreamFormatError, UnsortedStream

MAGIC = b"HQTT"
VERSION = 1
_HEADER = struct.Struct("<4sHHQ")
_RECORD_DTYPE = np.dtype([("t", "<u8"), ("ch", "u1")])

CH_HERALD = 0
CH_SIGNAL = 1


@dataclass
class TimeTagStream:
    """Sorted detection events across a small number of channels."""

    timestamps_ps: np.ndarray
    channels: np.ndarray
    n_channels: int = 2
    meta: dict = field(default_factory=dict)
    # raw (un-windowed) herald timestamps; diagnostic only, not serialised
    raw_herald_ps: np.ndarray | None = None

    def __post_init__(self):
        self.timestamps_ps = np.ascontiguousarray(self.timestamps_ps, dtype=np.uint64)
        self.channels = np.ascontiguousarray(self.channels, dtype=np.uint8)
        if self.timestamps_ps.shape != self.channels.shape:
            raise StreamFormatError("timestamps and channels differ in length")
        if self.channels.size and int(self.channels.max()) >= self.n_channels:
            raise StreamFormatError(
                f"channel id {int(self.channels.max())} outside 0..{self.n_channels - 1}"
            )

    def __len__(self):
        return int(self.timestamps_ps.size)

    def check_sorted(self):
        t = self.timestamps_ps
        if t.size > 1 and np.any(t[1:] < t[:-1]):
            raise UnsortedStream("timestamps are not monotonically non-decreasing")

    def channel(self, ch):
        """Timestamps of one channel (uint64 view copy)."""
        return self.timestamps_ps[self.channels == ch]

    def duration_ps(self):
        if len(self) == 0:
            return 0
        return int(self.timestamps_ps[-1])

    def rate_cps(self, ch, duration_s):
        if duration_s <= 0:
            return 0.0
        return float(self.channel(ch).size) / duration_s


def write_hqtt(stream: TimeTagStream, path):
    """Serialise to the binary container (atomic replace on success)."""
    records = np.empty(len(stream), dtype=_RECORD_DTYPE)
    records["t"] = stream.timestamps_ps
    records["ch"] = stream.channels
    header = _HEADER.pack(MAGIC, VERSION, stream.n_channels, len(stream))
    tmp = f"{path}.tmp-{os.getpid()}"
    try:
        with open(tmp, "wb") as fh:
            fh.write(header)
            fh.write(records.tobytes())
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def read_hqtt(path) -> TimeTagStream:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise StreamFormatError("file shorter than the 16-byte header")
        magic, version, n_channels, n_events = _HEADER.unpack(head)
        if magic != MAGIC:
            raise StreamFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise StreamFormatError(f"unsupported version {version}")
        body = fh.read()
    expected = n_events * _RECORD_DTYPE.itemsize
    if len(body) != expected:
        raise StreamFormatError(
            f"event payload is {len(body)} bytes, header promises {expected}"
        )
    records = np.frombuffer(body, dtype=_RECORD_DTYPE)
    return TimeTagStream(
        timestamps_ps=records["t"].copy(),
        channels=records["ch"].copy(),
        n_channels=int(n_channels),
    )


def metadata_path(stream_path):
    return f"{stream_path}.meta.json"


def write_metadata(stream_path, meta: dict):
    tmp = f"{metadata_path(stream_path)}.tmp-{os.getpid()}"
    try:
        with open(tmp, "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, metadata_path(stream_path))
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def read_metadata(stream_path) -> dict:
    with open(metadata_path(stream_path)) as fh:
        return json.load(fh)
