"""Binary 8-bit PGM (P5) and PPM (P6) frames."""
from pathlib import Path
from typing import Union

import numpy as np

from errors import FormatError


def to_bytes(frame: np.ndarray) -> np.ndarray:
    """Map [-1, 1] values onto 0..255."""
    return np.rint((np.clip(frame, -1.0, 1.0) + 1.0) * 127.5).astype(np.uint8)


def from_bytes(pixels: np.ndarray) -> np.ndarray:
    return pixels.astype(np.float64) / 127.5 - 1.0


def encode_frame(frame: np.ndarray) -> bytes:
    """Encode a (C, H, W) frame in [-1, 1]; one channel gives P5, three give P6."""
    channels, height, width = frame.shape
    if channels == 1:
        magic = b"P5"
    elif channels == 3:
        magic = b"P6"
    else:
        raise FormatError(f"netpbm frames need 1 or 3 channels, got {channels}")
    header = magic + f"\n{width} {height}\n255\n".encode("ascii")
    # samples are interleaved per pixel
    return header + to_bytes(frame).transpose(1, 2, 0).tobytes()


def _tokens(data: bytes, count: int):
    """First `count` whitespace-separated header tokens and the offset just past the last one."""
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("netpbm header is truncated")
        tokens.append(data[start:pos])
    return tokens, pos + 1


def decode_frame(data: bytes) -> np.ndarray:
    (magic, width, height, maxval), offset = _tokens(data, 4)
    if magic not in (b"P5", b"P6"):
        raise FormatError(f"unsupported netpbm magic {magic!r}")
    try:
        width, height, maxval = int(width), int(height), int(maxval)
    except ValueError as e:
        raise FormatError(f"bad netpbm header: {e}") from e
    if maxval != 255:
        raise FormatError(f"only 8-bit netpbm frames are supported, maxval={maxval}")
    channels = 1 if magic == b"P5" else 3
    size = width * height * channels
    if len(data) - offset < size:
        raise FormatError(f"netpbm payload has {len(data) - offset} bytes, expected {size}")
    pixels = np.frombuffer(data, dtype=np.uint8, count=size, offset=offset)
    return from_bytes(pixels.reshape(height, width, channels).transpose(2, 0, 1))


def write_frame(path: Union[str, Path], frame: np.ndarray) -> None:
    Path(path).write_bytes(encode_frame(frame))


def read_frame(path: Union[str, Path]) -> np.ndarray:
    return decode_frame(Path(path).read_bytes())
