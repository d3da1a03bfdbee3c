"""W8TS checkpoint: a flat list of named float64 blocks.

Layout (little-endian)::

    magic "W8TS" | count u32
    count x [ name_len u16 | name utf-8 | rank u8 | rank x dim u32 | prod(dims) x f64 ]

Blocks named ``meta/<key>`` are rank-0 scalars describing the run.
"""
import logging
import struct
from pathlib import Path
from typing import Dict, Union

import numpy as np

from errors import BadMagic, FormatError, TruncatedPayload

logger = logging.getLogger("TensorEngine")

MAGIC = b"W8TS"
META_PREFIX = "meta/"


def encode_blocks(blocks: Dict[str, np.ndarray]) -> bytes:
    parts = [MAGIC, struct.pack("<I", len(blocks))]
    for name, value in blocks.items():
        value = np.asarray(value, dtype=np.float64)
        raw_name = name.encode("utf-8")
        if len(raw_name) > 0xFFFF or value.ndim > 0xFF:
            raise FormatError(f"block {name!r} does not fit the checkpoint header fields")
        parts.append(struct.pack("<H", len(raw_name)))
        parts.append(raw_name)
        parts.append(struct.pack(f"<B{value.ndim}I", value.ndim, *value.shape))
        parts.append(value.astype("<f8").tobytes(order="C"))
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise TruncatedPayload(f"checkpoint ends at byte {len(self.data)}, needed {self.pos + size}")
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def decode_blocks(data: bytes) -> Dict[str, np.ndarray]:
    reader = _Reader(data)
    if reader.take(4) != MAGIC:
        raise BadMagic(f"not a W8TS checkpoint (magic {bytes(data[:4])!r})")
    (count,) = reader.unpack("<I")
    blocks: Dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = reader.unpack("<H")
        try:
            name = reader.take(name_len).decode("utf-8")
        except UnicodeDecodeError as e:
            raise FormatError(f"block name is not UTF-8: {e}") from e
        (rank,) = reader.unpack("<B")
        dims = reader.unpack(f"<{rank}I")
        n = int(np.prod(dims, dtype=np.int64))
        values = np.frombuffer(reader.take(8 * n), dtype="<f8").astype(np.float64)
        if name in blocks:
            raise FormatError(f"duplicate checkpoint block {name!r}")
        blocks[name] = values.reshape(dims)
    if reader.pos != len(data):
        raise FormatError(f"{len(data) - reader.pos} trailing bytes after the last block")
    return blocks


def save_checkpoint(path: Union[str, Path], blocks: Dict[str, np.ndarray]) -> None:
    Path(path).write_bytes(encode_blocks(blocks))
    logger.info(f"Saved checkpoint with {len(blocks)} blocks to {path}")


def load_checkpoint(path: Union[str, Path]) -> Dict[str, np.ndarray]:
    blocks = decode_blocks(Path(path).read_bytes())
    logger.info(f"Loaded checkpoint with {len(blocks)} blocks from {path}")
    return blocks


def split_meta(blocks: Dict[str, np.ndarray]):
    """Separate ``meta/*`` scalars from tensor blocks."""
    meta = {name[len(META_PREFIX):]: float(v) for name, v in blocks.items() if name.startswith(META_PREFIX)}
    tensors = {name: v for name, v in blocks.items() if not name.startswith(META_PREFIX)}
    return meta, tensors
