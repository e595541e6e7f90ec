"""Self-describing dataset files.

Layout: 5-byte magic ``PDEDS``, u32 format version, u32 header length, a JSON
header (family, count, shared grid, coefficient ranges, standardization,
master seed), then one record per sample: u32 JSON length, the record JSON
(spec + grid), and the field values as little-endian float32.

Values are quantized to float32 on write; reading returns float64 arrays
holding exactly the stored values, so write-read-write is byte-stable.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..pdegen.types import FieldSample, Grid, PdeSpec

MAGIC = b"PDEDS"
VERSION = 1


class ContainerError(Exception):
    pass


class BadMagicError(ContainerError):
    pass


class VersionError(ContainerError):
    pass


class TruncatedPayloadError(ContainerError):
    pass


def _json_bytes(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()


def _coefficient_ranges(samples) -> dict:
    ranges: dict[str, list[float]] = {}
    for s in samples:
        for name, value in s.spec.coefficients.items():
            lo, hi = ranges.setdefault(name, [float(value), float(value)])
            ranges[name] = [min(lo, float(value)), max(hi, float(value))]
    return ranges


def build_header(samples, standardization: dict | None = None,
                 master_seed: int | None = None) -> dict:
    grids = {_json_bytes(s.grid.to_dict()) for s in samples}
    return {
        "family": sorted({s.spec.family.value for s in samples}),
        "count": len(samples),
        "grid": samples[0].grid.to_dict() if len(grids) == 1 else None,
        "coefficient_ranges": _coefficient_ranges(samples),
        "standardization": standardization,
        "master_seed": master_seed,
    }


def write_dataset(samples, path, standardization: dict | None = None,
                  master_seed: int | None = None) -> None:
    if not samples:
        raise ValueError("refusing to write an empty dataset")
    header = _json_bytes(build_header(samples, standardization, master_seed))
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", VERSION, len(header)))
        f.write(header)
        for s in samples:
            rec = _json_bytes({"spec": s.spec.to_dict(), "grid": s.grid.to_dict()})
            f.write(struct.pack("<I", len(rec)))
            f.write(rec)
            f.write(np.ascontiguousarray(s.values, dtype="<f4").tobytes())


def _take(buf: memoryview, offset: int, n: int, what: str):
    if offset + n > len(buf):
        raise TruncatedPayloadError(f"file ends inside {what}")
    return buf[offset:offset + n], offset + n


def read_header(path) -> dict:
    buf = memoryview(Path(path).read_bytes())
    if len(buf) < len(MAGIC) or bytes(buf[:len(MAGIC)]) != MAGIC:
        raise BadMagicError(f"{path} is not a dataset container")
    off = len(MAGIC)
    raw, off = _take(buf, off, 8, "the fixed header")
    version, hlen = struct.unpack("<II", raw)
    if version != VERSION:
        raise VersionError(f"unsupported container version {version}")
    raw, off = _take(buf, off, hlen, "the JSON header")
    header = json.loads(bytes(raw))
    header["_payload_offset"] = off
    return header


def read_dataset(path) -> list[FieldSample]:
    buf = memoryview(Path(path).read_bytes())
    header = read_header(path)
    off = header.pop("_payload_offset")
    samples = []
    for i in range(header["count"]):
        raw, off = _take(buf, off, 4, f"record {i}")
        (rlen,) = struct.unpack("<I", raw)
        raw, off = _take(buf, off, rlen, f"record {i} metadata")
        rec = json.loads(bytes(raw))
        grid = Grid.from_dict(rec["grid"])
        spec = PdeSpec.from_dict(rec["spec"])
        nbytes = int(np.prod(grid.shape)) * 4
        raw, off = _take(buf, off, nbytes, f"record {i} values")
        values = np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(grid.shape)
        samples.append(FieldSample(values, grid, spec))
    if off != len(buf):
        raise ContainerError(f"{len(buf) - off} trailing bytes after the last record")
    return samples
