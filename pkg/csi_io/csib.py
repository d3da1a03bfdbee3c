"""CSIB container: a little-endian binary dump of quantised CSI packets.

Layout::

    magic "CSIB" | version u16 | n_rx u8 | n_tx u8 | n_sub u8 | n_pkt u32 | flags u16
    [n_pkt x u64 timestamps, ms]            if flags bit 0
    n_pkt*n_rx*n_tx*n_sub x (re i8, im i8)  packet, rx, tx, subcarrier order
"""
import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np

from csi_model import CsiSequence
from errors import BadMagic, FormatError, RangeOverflow, TruncatedPayload, UnsupportedVersion

logger = logging.getLogger("CsiIO")

MAGIC = b"CSIB"
VERSION = 1
FLAG_TIMESTAMPS = 0x0001
HEADER = struct.Struct("<4sHBBBIH")
HEADER_SIZE = HEADER.size  # 15

_INT8_MIN, _INT8_MAX = -128, 127


def _as_int8(values: np.ndarray) -> np.ndarray:
    rounded = np.rint(values)
    if np.any(rounded < _INT8_MIN) or np.any(rounded > _INT8_MAX):
        worst = float(np.max(np.abs(rounded)))
        raise RangeOverflow(f"CFR component {worst:g} does not fit in a signed 8-bit integer")
    return rounded.astype(np.int8)


def quantize_cfr(seq: CsiSequence, scale: float) -> CsiSequence:
    """Scale and round CFR components onto the signed 8-bit grid used on disk."""
    scaled = seq.values * scale
    re = _as_int8(scaled.real)
    im = _as_int8(scaled.imag)
    return CsiSequence(re.astype(np.float64) + 1j * im.astype(np.float64), seq.timestamps)


def write_csib(seq: CsiSequence) -> bytes:
    for name, count, limit in (("n_rx", seq.n_rx, 0xFF), ("n_tx", seq.n_tx, 0xFF),
                               ("n_sub", seq.n_sub, 0xFF), ("n_pkt", seq.n_pkt, 0xFFFFFFFF)):
        if count > limit:
            raise RangeOverflow(f"{name}={count} exceeds the header field width")

    flags = FLAG_TIMESTAMPS if seq.timestamps is not None else 0
    parts = [HEADER.pack(MAGIC, VERSION, seq.n_rx, seq.n_tx, seq.n_sub, seq.n_pkt, flags)]
    if seq.timestamps is not None:
        parts.append(seq.timestamps.astype("<u8").tobytes())

    pairs = np.empty(seq.values.shape + (2,), dtype=np.int8)
    pairs[..., 0] = _as_int8(seq.values.real)
    pairs[..., 1] = _as_int8(seq.values.imag)
    parts.append(pairs.tobytes(order="C"))
    return b"".join(parts)


def read_csib(data: bytes) -> CsiSequence:
    if len(data) < HEADER_SIZE:
        if len(data) >= 4 and data[:4] != MAGIC:
            raise BadMagic(f"expected magic {MAGIC!r}, found {bytes(data[:4])!r}")
        raise TruncatedPayload(f"stream of {len(data)} bytes is shorter than the {HEADER_SIZE}-byte header")

    magic, version, n_rx, n_tx, n_sub, n_pkt, flags = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagic(f"expected magic {MAGIC!r}, found {magic!r}")
    if version != VERSION:
        raise UnsupportedVersion(f"CSIB version {version} is not supported (expected {VERSION})")
    if min(n_rx, n_tx, n_sub, n_pkt) == 0:
        raise FormatError(f"header has a zero count: rx={n_rx} tx={n_tx} sub={n_sub} pkt={n_pkt}")
    if flags & ~FLAG_TIMESTAMPS:
        raise FormatError(f"unknown flag bits 0x{flags:04x}")

    has_timestamps = bool(flags & FLAG_TIMESTAMPS)
    ts_size = 8 * n_pkt if has_timestamps else 0
    payload_size = 2 * n_pkt * n_rx * n_tx * n_sub
    expected = HEADER_SIZE + ts_size + payload_size
    if len(data) < expected:
        raise TruncatedPayload(f"header implies {expected} bytes, stream has {len(data)}")
    if len(data) > expected:
        raise FormatError(f"{len(data) - expected} trailing bytes after payload")

    offset = HEADER_SIZE
    timestamps = None
    if has_timestamps:
        timestamps = np.frombuffer(data, dtype="<u8", count=n_pkt, offset=offset).astype(np.uint64)
        offset += ts_size

    pairs = np.frombuffer(data, dtype=np.int8, count=2 * n_pkt * n_rx * n_tx * n_sub, offset=offset)
    pairs = pairs.reshape(n_pkt, n_rx, n_tx, n_sub, 2).astype(np.float64)
    return CsiSequence(pairs[..., 0] + 1j * pairs[..., 1], timestamps)


def save_csib(path: Union[str, Path], seq: CsiSequence) -> None:
    Path(path).write_bytes(write_csib(seq))
    logger.debug(f"Wrote {seq!r} to {path}")


def load_csib(path: Union[str, Path]) -> CsiSequence:
    seq = read_csib(Path(path).read_bytes())
    logger.debug(f"Read {seq!r} from {path}")
    return seq
