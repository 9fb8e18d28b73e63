"""Minimal self-describing binary container shared by model and feature files.

Layout: 4-byte ASCII magic, u32 version, then a payload of little-endian
primitives written by the owning module.  Readers track the byte offset so a
truncated or corrupt file reports exactly where parsing stopped.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import FormatError


class Writer:
    def __init__(self, magic: bytes, version: int = 1):
        assert len(magic) == 4
        self._chunks = [magic, struct.pack("<I", version)]

    def u32(self, v):
        self._chunks.append(struct.pack("<I", int(v)))

    def i64(self, v):
        self._chunks.append(struct.pack("<q", int(v)))

    def f64(self, v):
        self._chunks.append(struct.pack("<d", float(v)))

    def text(self, s: str):
        raw = s.encode("utf-8")
        self.u32(len(raw))
        self._chunks.append(raw)

    def array(self, a):
        a = np.ascontiguousarray(a, dtype="<f8")
        self.u32(a.ndim)
        for d in a.shape:
            self.i64(d)
        self._chunks.append(a.tobytes())

    def tobytes(self) -> bytes:
        return b"".join(self._chunks)

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.tobytes())


class Reader:
    def __init__(self, data: bytes, magic: bytes):
        self._data = data
        self._pos = 0
        got = self._take(4, "magic")
        if got != magic:
            raise FormatError(f"bad magic {got!r}, expected {magic!r}", offset=0)
        self.version = self.u32()

    @classmethod
    def load(cls, path, magic: bytes):
        with open(path, "rb") as fh:
            return cls(fh.read(), magic)

    @property
    def offset(self) -> int:
        return self._pos

    def _take(self, n, what):
        if self._pos + n > len(self._data):
            raise FormatError(f"truncated while reading {what}", offset=self._pos)
        out = self._data[self._pos:self._pos + n]
        self._pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self._take(4, "u32"))[0]

    def i64(self) -> int:
        return struct.unpack("<q", self._take(8, "i64"))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self._take(8, "f64"))[0]

    def text(self) -> str:
        n = self.u32()
        return self._take(n, "text").decode("utf-8")

    def array(self) -> np.ndarray:
        ndim = self.u32()
        if ndim > 8:
            raise FormatError(f"implausible ndim {ndim}", offset=self._pos - 4)
        shape = tuple(self.i64() for _ in range(ndim))
        count = int(np.prod(shape)) if shape else 1
        raw = self._take(8 * count, "array data")
        return np.frombuffer(raw, dtype="<f8").reshape(shape).copy()

    def expect_end(self):
        if self._pos != len(self._data):
            raise FormatError("trailing bytes after payload", offset=self._pos)
