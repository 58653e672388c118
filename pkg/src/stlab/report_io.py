"""Binary coefficient caches, CSV tables and canonical JSON reports.

Cache layout (little-endian, no padding)::

    magic        4s   b"STC1"
    version      u32
    weight       u16
    level        u64
    source_tag   u8   0 = tau, 1 = elliptic, 2 = external
    max_prime    u64
    entry_count  u64
    entry_count records of (p: u64, a: 16-byte two's-complement signed)
"""

from __future__ import annotations

import csv
import json
import math
import struct
from pathlib import Path

import numpy as np

from .errors import DomainError, FormatError, StlabError
from .forms import CoefficientTable, NewformSpec, Source

MAGIC = b"STC1"
VERSION = 1
HEADER = struct.Struct("<4sIHQBQQ")
RECORD = np.dtype([("p", "<u8"), ("lo", "<u8"), ("hi", "<i8")])
_MASK64 = (1 << 64) - 1
_I128_MIN, _I128_MAX = -(1 << 127), (1 << 127) - 1


def save_cache(table: CoefficientTable, path) -> None:
    path = Path(path)
    records = np.empty(len(table), dtype=RECORD)
    for i, (p, a) in enumerate(table.entries):
        if not _I128_MIN <= a <= _I128_MAX:
            raise DomainError(f"coefficient at p={p} does not fit in 128 bits")
        records[i] = (p, a & _MASK64, a >> 64)
    header = HEADER.pack(MAGIC, VERSION, table.weight, table.level, table.spec.source.value,
                         table.max_prime, len(table))
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(records.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write cache {path}: {exc}") from exc


def load_cache(path) -> CoefficientTable:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read cache {path}: {exc}") from exc
    if len(data) < HEADER.size:
        raise FormatError(f"{path}: truncated header: expected at least {HEADER.size} bytes, got {len(data)}")
    magic, version, weight, level, tag, max_prime, count = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported cache version {version}")
    expected = HEADER.size + count * RECORD.itemsize
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} bytes for {count} entries, got {len(data)}")
    try:
        source = Source(tag)
    except ValueError:
        raise FormatError(f"{path}: unknown source tag {tag}") from None
    records = np.frombuffer(data, dtype=RECORD, offset=HEADER.size, count=count)
    entries = [(int(p), (int(hi) << 64) | int(lo)) for p, lo, hi in records.tolist()]
    try:
        spec = NewformSpec(weight, level, source)
        return CoefficientTable(spec, max_prime, tuple(entries))
    except StlabError as exc:
        raise FormatError(f"{path}: rejected: {exc}") from exc


def read_coefficient_csv(path) -> dict[int, int]:
    """Parse a ``p,a`` CSV file (``#`` comment lines allowed) into {p: a}."""
    path = Path(path)
    out: dict[int, int] = {}
    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(line for line in fh if not line.lstrip().startswith("#"))]
    except OSError as exc:
        raise OSError(f"cannot read coefficient table {path}: {exc}") from exc
    rows = [r for r in rows if r]
    if not rows or [c.strip() for c in rows[0]] != ["p", "a"]:
        raise FormatError(f"{path}: first non-comment line must be the header 'p,a'")
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise FormatError(f"{path}: row {lineno}: expected 2 columns, got {len(row)}")
        try:
            p, a = int(row[0]), int(row[1])
        except ValueError:
            raise FormatError(f"{path}: row {lineno}: non-integer value {row!r}") from None
        if p in out:
            raise FormatError(f"{path}: duplicate row for p={p}")
        out[p] = a
    return out


def write_coefficient_csv(table: CoefficientTable, fh) -> None:
    fh.write(f"# {table.label} weight={table.weight} level={table.level} max_prime={table.max_prime}\n")
    fh.write("p,a\n")
    for p, a in table.entries:
        fh.write(f"{p},{a}\n")


# -- canonical JSON ---------------------------------------------------------


def format_number(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"non-finite number {value} cannot be serialized")
    return format(value, ".17g")


def canonical_json(obj) -> str:
    """Compact JSON with sorted keys and 17-significant-digit floats."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, int, float, np.integer, np.floating)):
        return format_number(obj.item() if isinstance(obj, np.generic) else obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(json.dumps(k, ensure_ascii=False) + ":" + canonical_json(v) for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def report_json(report) -> str:
    return canonical_json(report.to_dict())


def parse_report(text: str):
    from .census import CensusReport

    d = json.loads(text)
    return CensusReport(
        form_label=d["form_label"],
        x=int(d["window"]["x"]),
        mode=d["window"]["mode"],
        observed=int(d["observed"]),
        bound_shape=float(d["bound_shape"]),
        params=dict(d["params"]),
    )
