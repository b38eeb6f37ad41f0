"""
Binary persistence of precomputed transient databases.

Layout (all integers unsigned little-endian, floats IEEE-754 binary64 LE)::

    offset  size  field
    0       8     magic  b"EMTRDB\\r\\n"
    8       2     format version (1)
    10      2     reserved, zero
    12      4     n_positions
    16      8     n_samples (samples per trace)
    24      8     dt (float64, seconds)
    32      32    network fingerprint (raw SHA-256 digest)
    64      4     provenance length P
    68      P     provenance, canonical JSON (UTF-8, sorted keys)
    ...     -     directory, n_positions entries:
                    2 bytes key length K, K bytes position key (UTF-8),
                    8 bytes distance_m (float64), 8 bytes body offset
    ...     8     header length H (= offset of the body; checked)
    H       -     body: n_positions * n_samples float64, one trace per
                  position in directory order

The body offset of entry i must equal H + 8 * i * n_samples and the file
must end exactly after the body, so a corrupted length field cannot pass
unnoticed.
"""
from __future__ import annotations

import io
import json
import os
import struct
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .netmodel import Position

MAGIC = b"EMTRDB\r\n"
VERSION = 1
_FIXED = struct.Struct("<8sHHIQd32sI")


class DBFormatError(ValueError):
    """Stream is not a transient database."""


class DBVersionError(DBFormatError):
    pass


class DBTruncatedError(DBFormatError):
    pass


class DBInconsistentError(DBFormatError):
    """Counts, offsets or lengths disagree with each other."""


@dataclass(frozen=True, eq=False)
class TransientDB:
    """Per-position short-circuit current responses to one excitation."""

    positions: tuple[Position, ...]
    traces: np.ndarray  # (n_positions, n_samples)
    dt: float
    fingerprint: str  # hex SHA-256 of the canonical network
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        traces = np.ascontiguousarray(self.traces, dtype="<f8")
        if traces.ndim != 2 or traces.shape[0] != len(self.positions):
            raise DBInconsistentError(
                f"{len(self.positions)} positions but traces of shape {traces.shape}"
            )
        if len(set(self.positions)) != len(self.positions):
            raise DBInconsistentError("duplicate positions")
        if not self.dt > 0:
            raise DBInconsistentError("dt must be positive")
        traces.flags.writeable = False
        object.__setattr__(self, "positions", tuple(Position(str(p[0]), float(p[1])) for p in self.positions))
        object.__setattr__(self, "traces", traces)

    @property
    def n_samples(self) -> int:
        return self.traces.shape[1]

    def __len__(self):
        return len(self.positions)

    def __eq__(self, other):
        if not isinstance(other, TransientDB):
            return NotImplemented
        return (
            self.positions == other.positions
            and self.dt == other.dt
            and self.fingerprint == other.fingerprint
            and self.provenance == other.provenance
            and np.array_equal(self.traces, other.traces)
        )


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False).encode("utf-8")


def dumps_db(db: TransientDB) -> bytes:
    prov = _canonical_json(db.provenance)
    digest = bytes.fromhex(db.fingerprint)
    if len(digest) != 32:
        raise DBInconsistentError("fingerprint must be a SHA-256 hex digest")
    n_pos, n_samp = db.traces.shape
    head = io.BytesIO()
    head.write(_FIXED.pack(MAGIC, VERSION, 0, n_pos, n_samp, db.dt, digest, len(prov)))
    head.write(prov)
    keys = [str(p).encode("utf-8") for p in db.positions]
    dir_size = sum(2 + len(k) + 16 for k in keys)
    body_start = head.tell() + dir_size + 8
    for i, (key, pos) in enumerate(zip(keys, db.positions)):
        head.write(struct.pack("<H", len(key)))
        head.write(key)
        head.write(struct.pack("<dQ", pos.distance_m, body_start + 8 * i * n_samp))
    head.write(struct.pack("<Q", body_start))
    return head.getvalue() + db.traces.tobytes()


def save_db(db: TransientDB, sink) -> bytes:
    """Encode ``db`` and write it to a path (atomically) or binary file object."""
    data = dumps_db(db)
    if hasattr(sink, "write"):
        sink.write(data)
        return data
    path = os.fspath(sink)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=".db")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return data


def _take(buf: bytes, pos: int, n: int, what: str) -> bytes:
    if pos + n > len(buf):
        raise DBTruncatedError(f"stream ends inside {what}: need {pos + n} bytes, have {len(buf)}")
    return buf[pos:pos + n]


def loads_db(buf: bytes) -> TransientDB:
    if len(buf) < len(MAGIC) or buf[:len(MAGIC)] != MAGIC:
        raise DBFormatError("bad magic: not a transient database")
    magic, version, reserved, n_pos, n_samp, dt, digest, plen = _FIXED.unpack(
        _take(buf, 0, _FIXED.size, "fixed header")
    )
    if version != VERSION:
        raise DBVersionError(f"unsupported format version {version} (expected {VERSION})")
    if reserved != 0:
        raise DBInconsistentError("reserved header field is not zero")
    pos = _FIXED.size
    try:
        provenance = json.loads(_take(buf, pos, plen, "provenance").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DBInconsistentError(f"provenance block unreadable: {exc}") from None
    pos += plen
    entries = []
    for i in range(n_pos):
        (klen,) = struct.unpack("<H", _take(buf, pos, 2, f"directory entry {i}"))
        pos += 2
        try:
            key = _take(buf, pos, klen, f"directory key {i}").decode("utf-8")
            p = Position.parse(key)
        except (UnicodeDecodeError, ValueError) as exc:
            raise DBInconsistentError(f"directory key {i} unreadable: {exc}") from None
        pos += klen
        dist, offset = struct.unpack("<dQ", _take(buf, pos, 16, f"directory entry {i}"))
        pos += 16
        if p.distance_m != dist:
            raise DBInconsistentError(f"directory entry {i}: key {key} disagrees with distance {dist!r}")
        entries.append((Position(p.segment_id, dist), offset))
    (body_start,) = struct.unpack("<Q", _take(buf, pos, 8, "header length"))
    pos += 8
    if body_start != pos:
        raise DBInconsistentError(f"header length field says {body_start}, header ends at {pos}")
    for i, (_, offset) in enumerate(entries):
        if offset != body_start + 8 * i * n_samp:
            raise DBInconsistentError(f"directory entry {i}: body offset {offset} out of place")
    expected = body_start + 8 * n_pos * n_samp
    if len(buf) < expected:
        raise DBTruncatedError(f"truncated body: expected {expected} bytes, got {len(buf)}")
    if len(buf) > expected:
        raise DBInconsistentError(f"{len(buf) - expected} trailing bytes after body")
    if not dt > 0:
        raise DBInconsistentError(f"dt must be positive, got {dt!r}")
    traces = np.frombuffer(buf, dtype="<f8", count=n_pos * n_samp, offset=body_start)
    return TransientDB(
        positions=tuple(p for p, _ in entries),
        traces=traces.reshape(n_pos, n_samp),
        dt=dt,
        fingerprint=digest.hex(),
        provenance=provenance,
    )


def load_db(source) -> TransientDB:
    """Load from a path or binary file object."""
    if hasattr(source, "read"):
        return loads_db(source.read())
    with open(source, "rb") as fh:
        return loads_db(fh.read())
