"""Flat binary container for named float64 tensors.

Layout: ``b"DBSC"``, version ``u32``, then one record per tensor:
name length ``u32``, UTF-8 name, rank ``u32``, dims ``u64 * rank``,
little-endian float64 payload. All integers are little-endian.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import ParseError

MAGIC = b"DBSC"
VERSION = 1


def dumps(tensors):
    out = [MAGIC, struct.pack("<I", VERSION)]
    for name in tensors:
        arr = np.asarray(tensors[name], dtype="<f8")
        raw = name.encode("utf-8")
        out.append(struct.pack("<I", len(raw)))
        out.append(raw)
        out.append(struct.pack("<I", arr.ndim))
        out.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        out.append(np.ascontiguousarray(arr).tobytes())
    return b"".join(out)


def loads(data):
    if data[:4] != MAGIC:
        raise ParseError("not a DBSC checkpoint")
    (version,) = struct.unpack_from("<I", data, 4)
    if version != VERSION:
        raise ParseError(f"unsupported checkpoint version {version}")
    pos = 8
    out = {}
    try:
        while pos < len(data):
            (n,) = struct.unpack_from("<I", data, pos)
            pos += 4
            name = data[pos : pos + n].decode("utf-8")
            pos += n
            (rank,) = struct.unpack_from("<I", data, pos)
            pos += 4
            dims = struct.unpack_from(f"<{rank}Q", data, pos)
            pos += 8 * rank
            count = int(np.prod(dims)) if rank else 1
            arr = np.frombuffer(data, dtype="<f8", count=count, offset=pos).reshape(dims)
            pos += 8 * count
            out[name] = arr.astype(np.float64)
    except (struct.error, ValueError) as exc:
        raise ParseError(f"truncated checkpoint at byte {pos}") from exc
    return out


def save_checkpoint(path, tensors):
    path = Path(path)
    path.write_bytes(dumps(tensors))
    return path


def load_checkpoint(path):
    return loads(Path(path).read_bytes())


def restore(target, tensors, prefix=""):
    """Copy loaded arrays into the (same-shaped) arrays of ``target`` in place."""
    for name, arr in target.items():
        arr[...] = tensors[prefix + name]
