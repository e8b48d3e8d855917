"""Flat binary checkpoints.

Layout::

    bytes 0..7    magic b"LZCKPT01"
    bytes 8..15   header length H, unsigned 64-bit little endian
    next H bytes  UTF-8 JSON header
    remainder     float64 little-endian tensor data, concatenated

The header holds ``tensors``, a list of ``{"name", "shape", "offset", "count"}``
records whose offsets (in bytes) are relative to the start of the data block,
plus free-form metadata (model kind, task, learned curvatures).
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"LZCKPT01"


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, tensors: dict, meta: dict):
    records = []
    blobs = []
    offset = 0
    for name in sorted(tensors):
        arr = np.asarray(tensors[name], dtype="<f8")  # keeps 0-d shapes; tobytes() emits C order
        records.append({"name": name, "shape": list(arr.shape), "offset": offset, "count": int(arr.size)})
        blobs.append(arr.tobytes())
        offset += arr.nbytes
    header = json.dumps({"format": 1, "tensors": records, **meta}, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path):
    """Return ``(tensors, header)``."""
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"checkpoint not found: {path}")
    raw = path.read_bytes()
    if raw[:8] != MAGIC:
        raise CheckpointError(f"{path}: not a lorentz checkpoint")
    (hlen,) = struct.unpack("<Q", raw[8:16])
    try:
        header = json.loads(raw[16:16 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: corrupt header ({exc})") from None
    data = raw[16 + hlen:]
    tensors = {}
    for rec in header["tensors"]:
        start = rec["offset"]
        stop = start + 8 * rec["count"]
        if stop > len(data):
            raise CheckpointError(f"{path}: tensor {rec['name']!r} runs past end of file")
        tensors[rec["name"]] = np.frombuffer(data[start:stop], dtype="<f8").reshape(rec["shape"]).copy()
    return tensors, header
