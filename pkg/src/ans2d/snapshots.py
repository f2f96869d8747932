"""Binary state snapshots.

Layout (little endian):
    bytes 0-3    magic "ANS2"
    bytes 4-7    u32 n1
    bytes 8-11   u32 n2
    bytes 12-19  f64 simulation time
    bytes 20-    2 * n1 * n2 f64 physical velocity samples,
                 component 1 then component 2, x1 index slow, x2 fast.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import SnapshotFormatError
from .spectral import PhysicalField, TorusGrid

MAGIC = b"ANS2"
HEADER = struct.Struct("<4sIId")


def write_snapshot(path: str | Path, f: PhysicalField, time: float) -> None:
    payload = np.ascontiguousarray(f.samples, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, f.grid.n1, f.grid.n2, float(time)))
        fh.write(payload)


def read_snapshot(path: str | Path) -> tuple[PhysicalField, float]:
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise SnapshotFormatError(
            f"file too short for header ({len(data)} < {HEADER.size} bytes)",
            byte_offset=len(data))
    magic, n1, n2, time = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", byte_offset=0)
    try:
        grid = TorusGrid(int(n1), int(n2))
    except ValueError as exc:
        raise SnapshotFormatError(f"bad grid size {n1}x{n2}: {exc}", byte_offset=4) from exc
    expected = 2 * n1 * n2 * 8
    actual = len(data) - HEADER.size
    if actual != expected:
        raise SnapshotFormatError(
            f"payload is {actual} bytes, expected {expected} for {n1}x{n2}",
            byte_offset=len(data))
    samples = np.frombuffer(data, dtype="<f8", offset=HEADER.size).reshape(2, n1, n2)
    bad = ~np.isfinite(samples)
    if np.any(bad):
        first = int(np.flatnonzero(bad.ravel())[0])
        raise SnapshotFormatError("non-finite sample",
                                  byte_offset=HEADER.size + 8 * first)
    return PhysicalField(grid, samples.astype(np.float64)), float(time)
