"""Binary checkpoint format.

Layout, all integers little-endian:

    magic   6 bytes  "CCEAD\\0"
    version u32      format revision (currently 1)
    config  u32 byte length, then that many UTF-8 bytes of key=value lines
    count   u32      number of named tensors
    tensor  u16 name length, name bytes, u8 rank, rank x u32 dims,
            prod(dims) x f32 values

Tensors are written sorted by name so saving a freshly loaded checkpoint
reproduces the original file byte for byte.  Values are stored as 32-bit
floats; widening to the in-memory doubles and narrowing back is exact, so
the round trip is lossless at the file level.
"""

import struct
import sys
from array import array

from . import CHECKPOINT_MAGIC as MAGIC
from .config import format_flat, parse_flat
from .errors import CheckpointError

VERSION = 1

_LITTLE = sys.byteorder == "little"


def _f32_bytes(values):
    buf = array("f", values)
    if not _LITTLE:
        buf.byteswap()
    return buf.tobytes()


def _f64_from_f32(raw, n):
    buf = array("f")
    buf.frombytes(raw)
    if not _LITTLE:
        buf.byteswap()
    if len(buf) != n:
        raise CheckpointError("tensor payload truncated")
    return array("d", buf)


def save_checkpoint(path, config, tensors):
    """Write config (mapping of strings) and tensors (name -> object with
    .shape and .data, or a (shape, values) pair) to path."""
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<I", VERSION)
    cfg = format_flat({str(k): str(v) for k, v in config.items()}).encode("utf-8")
    blob += struct.pack("<I", len(cfg))
    blob += cfg
    names = sorted(tensors)
    blob += struct.pack("<I", len(names))
    for name in names:
        t = tensors[name]
        shape, data = (t if isinstance(t, tuple) else (t.shape, t.data))
        shape = tuple(int(d) for d in shape)
        enc = name.encode("utf-8")
        if len(enc) > 0xFFFF:
            raise CheckpointError("tensor name too long: %r" % name[:40])
        if len(shape) > 0xFF:
            raise CheckpointError("tensor rank %d too large" % len(shape))
        n = 1
        for d in shape:
            if d < 1:
                raise CheckpointError("bad dimension %d in %r" % (d, name))
            n *= d
        if n != len(data):
            raise CheckpointError("tensor %r: shape %r does not match %d values"
                                  % (name, shape, len(data)))
        blob += struct.pack("<H", len(enc))
        blob += enc
        blob += struct.pack("<B", len(shape))
        blob += struct.pack("<%dI" % len(shape), *shape)
        blob += _f32_bytes(data)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
    import os
    os.replace(tmp, path)


class _Reader:
    def __init__(self, raw):
        self.raw = raw
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.raw):
            raise CheckpointError("checkpoint truncated at byte %d" % self.pos)
        out = self.raw[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self):
        return struct.unpack("<I", self.take(4))[0]

    def u16(self):
        return struct.unpack("<H", self.take(2))[0]

    def u8(self):
        return self.take(1)[0]


def load_checkpoint(path):
    """Read a checkpoint; returns (config dict, {name: (shape, array('d'))})."""
    with open(path, "rb") as fh:
        raw = fh.read()
    r = _Reader(raw)
    if r.take(len(MAGIC)) != MAGIC:
        raise CheckpointError("bad magic bytes: not a checkpoint file")
    version = r.u32()
    if version != VERSION:
        raise CheckpointError("unsupported checkpoint version %d" % version)
    cfg = parse_flat(r.take(r.u32()).decode("utf-8"))
    tensors = {}
    for _ in range(r.u32()):
        name = r.take(r.u16()).decode("utf-8")
        rank = r.u8()
        shape = tuple(r.u32() for _ in range(rank))
        n = 1
        for d in shape:
            n *= d
        tensors[name] = (shape, _f64_from_f32(r.take(4 * n), n))
    if r.pos != len(raw):
        raise CheckpointError("%d trailing bytes after last tensor"
                              % (len(raw) - r.pos))
    return cfg, tensors
