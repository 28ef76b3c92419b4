"""Tensor container I/O (the toolkit's on-disk interchange format).

Layout: magic ``ZTDM``, version u16 LE, dtype u8 (0 = uint8, 1 = float32 LE),
channels u32 LE, height u32 LE, width u32 LE, row-major channel-major
payload. Tri-state masks encode NEG=0, POS=1, IGN=255.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"ZTDM"
VERSION = 1
DTYPE_U8 = 0
DTYPE_F32 = 1
IGN = 255

_HEADER = struct.Struct("<4sHBIII")


def read_container(path) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    magic, version, dtype_code, c, h, w = _HEADER.unpack_from(raw)
    if magic != MAGIC or version != VERSION:
        raise ValueError(f"{path}: not a supported container")
    dt = np.dtype(np.uint8) if dtype_code == DTYPE_U8 else np.dtype("<f4")
    body = raw[_HEADER.size:]
    expected = c * h * w * dt.itemsize
    if len(body) != expected:
        raise ValueError(f"{path}: truncated payload (expected {expected} bytes)")
    return np.frombuffer(body, dtype=dt).reshape(c, h, w).copy()


def write_container(path, array) -> None:
    a = np.asarray(array)
    if a.ndim == 2:
        a = a[None]
    if a.dtype == np.uint8:
        code, payload = DTYPE_U8, a
    else:
        code, payload = DTYPE_F32, a.astype("<f4")
    c, h, w = payload.shape
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, code, c, h, w))
        f.write(np.ascontiguousarray(payload).tobytes())
