"""Bespoke binary snapshot format.

Layout (all little-endian):

    8 bytes   magic  b"LPTURB01"
    u32       format version (currently 1)
    u32       n                 (grid points per dimension)
    f64       L                 (box size)
    f64       t                 (snapshot time)
    u32       field_count
    16 bytes  ASCII tag, per field (NUL padded)
    payload   per field: 3 * n^3 f64, component-minor row-major
              (x-fastest component index: sample (i,j,k) stores vx,vy,vz
              contiguously)
    u64       CRC-64/ECMA-182 of everything before it

The CRC uses polynomial 0x42F0E1EBA9EA3693, init 0, no reflection, no
final xor.
"""

from __future__ import annotations

import struct

import numpy as np

from .core import GridSpec, RealVectorField, Snapshot

MAGIC = b"LPTURB01"
VERSION = 1
_CRC_POLY = 0x42F0E1EBA9EA3693
_MASK = (1 << 64) - 1


class SnapshotFormatError(ValueError):
    """Malformed snapshot file."""


def _crc_table() -> np.ndarray:
    table = np.zeros(256, dtype=np.uint64)
    for i in range(256):
        c = i << 56
        for _ in range(8):
            c = ((c << 1) ^ _CRC_POLY if c & (1 << 63) else c << 1) & _MASK
        table[i] = c
    return table


_TABLE = _crc_table()
_TABLE_INT = [int(x) for x in _TABLE]


def crc64(data: bytes, crc: int = 0) -> int:
    """CRC-64/ECMA-182 (table-driven)."""
    table = _TABLE_INT
    for b in data:
        crc = (table[((crc >> 56) ^ b) & 0xFF] ^ (crc << 8)) & _MASK
    return crc


def write_snapshot(path, snapshot: Snapshot):
    grids = {f.grid for f in snapshot.fields.values()}
    if len(grids) != 1:
        raise ValueError("snapshot fields on mismatched grids")
    g = next(iter(grids))
    tags = sorted(snapshot.fields)
    for tag in tags:
        raw = tag.encode("ascii")
        if len(raw) > 16:
            raise ValueError(f"field tag {tag!r} longer than 16 bytes")
    header = MAGIC + struct.pack("<IIddI", VERSION, g.n, g.L, snapshot.t, len(tags))
    header += b"".join(tag.encode("ascii").ljust(16, b"\0") for tag in tags)
    crc = crc64(header)
    with open(path, "wb") as f:
        f.write(header)
        for tag in tags:
            # (3,n,n,n) -> (n,n,n,3): component-minor on disk
            buf = np.ascontiguousarray(
                snapshot.fields[tag].data.transpose(1, 2, 3, 0),
                dtype="<f8").tobytes()
            crc = crc64(buf, crc)
            f.write(buf)
        f.write(struct.pack("<Q", crc))


def read_snapshot(path) -> Snapshot:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < len(MAGIC) + 28 + 8:
        raise SnapshotFormatError(f"{path}: truncated file ({len(raw)} bytes)")
    if raw[:8] != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic at offset 0: {raw[:8]!r}")
    version, n, L, t, count = struct.unpack_from("<IIddI", raw, 8)
    if version != VERSION:
        raise SnapshotFormatError(f"{path}: unsupported format version {version}")
    off = 8 + 28
    tags = []
    for _ in range(count):
        tags.append(raw[off:off + 16].rstrip(b"\0").decode("ascii"))
        off += 16
    payload = 3 * n**3 * 8
    expected = off + count * payload + 8
    if len(raw) != expected:
        raise SnapshotFormatError(
            f"{path}: size mismatch, expected {expected} bytes, got {len(raw)}")
    (stored_crc,) = struct.unpack_from("<Q", raw, len(raw) - 8)
    actual = crc64(raw[:-8])
    if actual != stored_crc:
        raise SnapshotFormatError(
            f"{path}: CRC mismatch at offset {len(raw) - 8}: "
            f"stored {stored_crc:#018x}, computed {actual:#018x}")
    g = GridSpec(n, L)
    fields = {}
    for tag in tags:
        arr = np.frombuffer(raw, dtype="<f8", count=3 * n**3, offset=off)
        fields[tag] = RealVectorField(
            g, np.ascontiguousarray(arr.reshape(n, n, n, 3).transpose(3, 0, 1, 2)))
        off += payload
    return Snapshot(t, fields)
