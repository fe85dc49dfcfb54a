"""Binary checkpoint format.

Layout (all integers little-endian)::

    b"SSIR"                 magic
    u32  version            currently 1
    u32  flags              bit 0: Adam state section present
    u32  n                  length of the config document
    n bytes                 UTF-8 JSON: {"backbone": ..., "precision": ..., "meta": ...}
    f64 * P                 parameters, layer by layer, weight (row-major) then bias
    [u64 t, f64 * P m, f64 * P v]   optional Adam state
"""
from __future__ import annotations

import json
import struct

import numpy as np

from .backbones import BackboneConfig, MlpModel, param_count
from .errors import CheckpointVersionError, NotACheckpointError, TruncatedCheckpointError

MAGIC = b"SSIR"
VERSION = 1
FLAG_ADAM = 1

_HEADER = struct.Struct("<4sIII")


def _precision(dtype):
    return "single" if np.dtype(dtype) == np.float32 else "double"


def dumps(model, state=None, meta=None):
    doc = {
        "backbone": model.config.to_dict(),
        "precision": _precision(model.dtype),
        "meta": meta or {},
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")
    flags = FLAG_ADAM if state is not None else 0
    parts = [_HEADER.pack(MAGIC, VERSION, flags, len(blob)), blob, model.params.astype("<f8").tobytes()]
    if state is not None:
        parts += [struct.pack("<Q", state.t), state.m.astype("<f8").tobytes(), state.v.astype("<f8").tobytes()]
    return b"".join(parts)


def save_checkpoint(model, path, state=None, meta=None):
    with open(path, "wb") as fh:
        fh.write(dumps(model, state, meta))


class _Reader:
    def __init__(self, data):
        self.data = memoryview(data)
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.data):
            raise TruncatedCheckpointError("unexpected end of data")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk


def loads(data):
    """Parse checkpoint bytes into ``(model, adam_state_or_None, meta)``."""
    from .training import AdamState

    if len(data) < 4 or bytes(data[:4]) != MAGIC:
        raise NotACheckpointError("not a checkpoint (bad magic bytes)")
    r = _Reader(data)
    _, version, flags, n = _HEADER.unpack(r.take(_HEADER.size))
    if version != VERSION:
        raise CheckpointVersionError(f"checkpoint format version {version} is not supported (expected {VERSION})")
    try:
        doc = json.loads(bytes(r.take(n)).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise NotACheckpointError(f"not a checkpoint (config document unreadable: {exc})") from None
    config = BackboneConfig(**doc["backbone"])
    dtype = np.float32 if doc.get("precision") == "single" else np.float64
    count = param_count(config)
    params = np.frombuffer(r.take(8 * count), dtype="<f8").astype(dtype)
    state = None
    if flags & FLAG_ADAM:
        (t,) = struct.unpack("<Q", r.take(8))
        m = np.frombuffer(r.take(8 * count), dtype="<f8").astype(dtype)
        v = np.frombuffer(r.take(8 * count), dtype="<f8").astype(dtype)
        state = AdamState(m, v, int(t))
    if r.pos != len(r.data):
        raise NotACheckpointError(f"not a checkpoint ({len(r.data) - r.pos} trailing bytes)")
    return MlpModel(config, params), state, doc.get("meta", {})


def read_checkpoint(path):
    with open(path, "rb") as fh:
        return loads(fh.read())


def load_checkpoint(path):
    return read_checkpoint(path)[0]
