"""Record serialization: the ``ecgb-v1`` binary layout and plain CSV.

ecgb-v1 (all little-endian)::

    magic        4 bytes  b"ECGB"
    version      u8       1
    n_leads      u16
    n_samples    u32      samples per lead
    fs           f32
    lead codes   12 x 4 bytes, ASCII, NUL padded (unused slots all NUL)
    payload      n_leads * n_samples float32, lead-major

CSV: optional ``# fs=<Hz>`` comment line, a header row of lead names, then
one row per time step.
"""
from __future__ import annotations

import csv
import io
import re
import struct
from pathlib import Path

import numpy as np

from .core import EcgRecord, check_complete_leads
from .exceptions import (
    MalformedHeader,
    NonFiniteSample,
    TruncatedPayload,
    ValidationError,
)

MAGIC = b"ECGB"
VERSION = 1
_HEADER = struct.Struct("<4sBHIf48s")
_MAX_LEAD_SLOTS = 12
FORMATS = ("csv", "ecgb-v1")


def guess_format(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix in (".ecgb", ".bin"):
        return "ecgb-v1"
    raise ValidationError(f"cannot infer record format from {path!s}")


def encode_ecgb(rec: EcgRecord) -> bytes:
    if rec.n_leads > _MAX_LEAD_SLOTS:
        raise ValidationError("ecgb-v1 holds at most 12 leads")
    codes = b"".join(name.encode("ascii").ljust(4, b"\0") for name in rec.leads)
    header = _HEADER.pack(
        MAGIC, VERSION, rec.n_leads, rec.length, rec.fs, codes.ljust(48, b"\0")
    )
    payload = np.ascontiguousarray(rec.samples, dtype="<f4").tobytes()
    return header + payload


def decode_ecgb(blob: bytes, source_id: str = "") -> EcgRecord:
    if len(blob) < _HEADER.size:
        raise MalformedHeader(f"header needs {_HEADER.size} bytes, got {len(blob)}")
    magic, version, n_leads, n_samples, fs, codes = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise MalformedHeader(f"bad magic {magic!r}")
    if version != VERSION:
        raise MalformedHeader(f"unsupported ecgb version {version}")
    if not 1 <= n_leads <= _MAX_LEAD_SLOTS or n_samples < 1:
        raise MalformedHeader(f"bad dimensions {n_leads}x{n_samples}")
    try:
        leads = tuple(
            codes[4 * i: 4 * i + 4].rstrip(b"\0").decode("ascii") for i in range(n_leads)
        )
    except UnicodeDecodeError as exc:
        raise MalformedHeader("lead codes are not ASCII") from exc
    expected = n_leads * n_samples * 4
    payload = blob[_HEADER.size:]
    if len(payload) < expected:
        raise TruncatedPayload(f"payload has {len(payload)} bytes, need {expected}")
    if len(payload) > expected:
        raise MalformedHeader(f"{len(payload) - expected} trailing bytes after payload")
    samples = np.frombuffer(payload, dtype="<f4").reshape(n_leads, n_samples)
    if not np.all(np.isfinite(samples)):
        raise NonFiniteSample("payload contains NaN or Inf")
    return EcgRecord(leads, float(fs), samples.astype(np.float64), source_id=source_id)


_FS_LINE = re.compile(r"^#\s*fs\s*=\s*([0-9.eE+-]+)\s*$")


def _read_csv(text: str, fs: float | None, source_id: str) -> EcgRecord:
    lines = text.splitlines()
    while lines and lines[0].startswith("#"):
        m = _FS_LINE.match(lines.pop(0))
        if m and fs is None:
            fs = float(m.group(1))
    if not lines:
        raise MalformedHeader("csv has no header row")
    if fs is None:
        raise MalformedHeader("csv lacks a '# fs=' line and no fs was given")
    rows = list(csv.reader(lines))
    header = [h.strip() for h in rows[0]]
    check_complete_leads(header)
    body = [r for r in rows[1:] if r]
    if not body:
        raise TruncatedPayload("csv has no sample rows")
    try:
        data = np.array([[float(v) for v in r] for r in body], dtype=np.float64)
    except ValueError as exc:
        raise MalformedHeader(f"non-numeric csv value: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != len(header):
        raise TruncatedPayload("ragged csv rows")
    if not np.all(np.isfinite(data)):
        raise NonFiniteSample("csv contains NaN or Inf")
    return EcgRecord(tuple(header), fs, data.T, source_id=source_id)


def _write_csv(rec: EcgRecord) -> str:
    buf = io.StringIO()
    buf.write(f"# fs={rec.fs!r}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(rec.leads)
    for row in rec.samples.T:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def read_record(path, format: str | None = None, fs: float | None = None) -> EcgRecord:
    """Load a record. ``fs`` is only consulted for CSV files without an fs line."""
    path = Path(path)
    fmt = format or guess_format(path)
    source_id = path.stem
    if fmt == "ecgb-v1":
        return decode_ecgb(path.read_bytes(), source_id=source_id)
    if fmt == "csv":
        rec = _read_csv(path.read_text(), fs, source_id)
        return rec
    raise ValidationError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def write_record(rec: EcgRecord, path, format: str | None = None) -> None:
    path = Path(path)
    fmt = format or guess_format(path)
    if fmt == "ecgb-v1":
        path.write_bytes(encode_ecgb(rec))
    elif fmt == "csv":
        path.write_text(_write_csv(rec))
    else:
        raise ValidationError(f"unknown format {fmt!r}; expected one of {FORMATS}")
