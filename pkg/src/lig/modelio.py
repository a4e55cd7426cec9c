"""Bit-exact binary model files.

Layout (all little-endian):
  magic "LIG1" | version u32=1 | full_w u32 | full_h u32 | channels u8 |
  level_count u8 (1 or 2) | per level: render_w u32, render_h u32, n u64,
  positions 2n f32, covariances (a,b,c interleaved) 3n f32, colors C*n f32 |
  res_min f32 | res_max f32

Every header-declared size is validated against the actual file length before
any array is materialized.
"""

from __future__ import annotations

import struct

import numpy as np

from .core import GaussianCloud
from .pipeline import Level, LogModel

MAGIC = b"LIG1"
VERSION = 1

_MAX_POINTS = 1 << 40  # sanity bound well above any realistic cloud


class ModelFormatError(ValueError):
    """Malformed model file (bad magic, version, truncation, or size lies)."""


def encode_model(model: LogModel) -> bytes:
    parts = [MAGIC, struct.pack("<IIIBB", VERSION, model.full_w, model.full_h,
                                model.channels, len(model.levels))]
    for lvl in model.levels:
        cloud = lvl.cloud
        parts.append(struct.pack("<IIQ", lvl.width, lvl.height, cloud.n))
        parts.append(np.ascontiguousarray(cloud.mu, dtype="<f4").tobytes())
        parts.append(np.ascontiguousarray(cloud.cov, dtype="<f4").tobytes())
        parts.append(np.ascontiguousarray(cloud.color, dtype="<f4").tobytes())
    parts.append(struct.pack("<ff", model.res_min, model.res_max))
    return b"".join(parts)


def save_model(model: LogModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_model(model))


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.off = 0

    def take(self, nbytes: int, what: str) -> bytes:
        if nbytes < 0 or self.off + nbytes > len(self.buf):
            raise ModelFormatError(
                f"truncated file: need {nbytes} bytes for {what} at offset "
                f"{self.off}, have {len(self.buf) - self.off}"
            )
        out = self.buf[self.off:self.off + nbytes]
        self.off += nbytes
        return out

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def decode_model(buf: bytes) -> LogModel:
    r = _Reader(buf)
    if r.take(4, "magic") != MAGIC:
        raise ModelFormatError("bad magic (not a model file)")
    version, full_w, full_h, channels, level_count = r.unpack("<IIIBB", "header")
    if version != VERSION:
        raise ModelFormatError(f"unsupported version {version}")
    if level_count not in (1, 2):
        raise ModelFormatError(f"invalid level count {level_count}")
    if channels == 0:
        raise ModelFormatError("zero channels")
    levels = []
    for i in range(level_count):
        render_w, render_h, n = r.unpack("<IIQ", f"level {i} header")
        if n > _MAX_POINTS:
            raise ModelFormatError(f"level {i} declares an absurd point count {n}")
        # validate total payload size before touching any array
        payload = (2 + 3 + channels) * n * 4
        if r.off + payload > len(buf):
            raise ModelFormatError(
                f"truncated file: level {i} declares {n} points "
                f"({payload} bytes) but only {len(buf) - r.off} remain"
            )
        mu = np.frombuffer(r.take(8 * n, "positions"), dtype="<f4").reshape(n, 2)
        cov = np.frombuffer(r.take(12 * n, "covariances"), dtype="<f4").reshape(n, 3)
        color = np.frombuffer(r.take(4 * channels * n, "colors"),
                              dtype="<f4").reshape(n, channels)
        cloud = GaussianCloud(mu.copy(), cov.copy(), color.copy())
        levels.append(Level(cloud, render_w, render_h))
    res_min, res_max = r.unpack("<ff", "residual bounds")
    if r.off != len(buf):
        raise ModelFormatError(f"{len(buf) - r.off} trailing bytes after model payload")
    if not (np.isfinite(res_min) and np.isfinite(res_max)) or res_min > res_max:
        raise ModelFormatError(f"invalid residual bounds ({res_min}, {res_max})")
    return LogModel(full_w, full_h, channels, levels, res_min, res_max)


def load_model(path) -> LogModel:
    with open(path, "rb") as fh:
        return decode_model(fh.read())
