"""Binary PPM (P6) / PGM (P5) reading and writing.

Images are plain numpy ``uint8`` arrays: ``(H, W, 3)`` for RGB, ``(H, W)`` for
grayscale and binary masks.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ImageIOError, MalformedHeaderError, TruncatedDataError, UnsupportedFormatError


def _parse_header(data: bytes, path) -> tuple[bytes, int, int, int, int]:
    """Return ``(magic, width, height, maxval, offset_of_pixels)``."""
    magic = data[:2]
    pos = 2
    values = []
    while len(values) < 3:
        # skip whitespace and comment lines
        while pos < len(data) and (data[pos:pos + 1].isspace() or data[pos:pos + 1] == b"#"):
            if data[pos:pos + 1] == b"#":
                nl = data.find(b"\n", pos)
                pos = len(data) if nl < 0 else nl + 1
            else:
                pos += 1
        start = pos
        while pos < len(data) and data[pos:pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise MalformedHeaderError(f"{path}: malformed header (expected a number at byte {pos})")
        values.append(int(data[start:pos]))
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise MalformedHeaderError(f"{path}: malformed header (no whitespace after maxval)")
    width, height, maxval = values
    if width < 1 or height < 1:
        raise MalformedHeaderError(f"{path}: invalid dimensions {width}x{height}")
    if not 1 <= maxval <= 255:
        raise UnsupportedFormatError(f"{path}: maxval {maxval} not supported (8-bit only)")
    return magic, width, height, maxval, pos + 1


def decode_pnm(data: bytes, path="<bytes>") -> np.ndarray:
    """Decode P5/P6 bytes. P5 yields (H, W); P6 yields (H, W, 3)."""
    if data[:2] not in (b"P5", b"P6"):
        raise MalformedHeaderError(f"{path}: not a binary PGM/PPM file (magic {data[:2]!r})")
    magic, width, height, maxval, offset = _parse_header(data, path)
    channels = 3 if magic == b"P6" else 1
    need = width * height * channels
    raw = data[offset:offset + need]
    if len(raw) < need:
        raise TruncatedDataError(f"{path}: truncated pixel data ({len(raw)} of {need} bytes)")
    pixels = np.frombuffer(raw, dtype=np.uint8)
    if maxval != 255:
        pixels = ((pixels.astype(np.uint32) * 255 + maxval // 2) // maxval).astype(np.uint8)
    shape = (height, width, 3) if channels == 3 else (height, width)
    return pixels.reshape(shape).copy()


def _read(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise ImageIOError(f"{path}: {exc}") from exc


def load_image(path) -> np.ndarray:
    """Load an image as RGB ``(H, W, 3)`` uint8; grayscale is replicated.

    PPM/PGM are decoded natively. Other formats go through Pillow when it is
    installed.
    """
    data = _read(path)
    if data[:2] in (b"P5", b"P6"):
        img = decode_pnm(data, path)
    else:
        img = _load_with_pillow(path)
    if img.ndim == 2:
        img = np.repeat(img[:, :, None], 3, axis=2)
    return img


def load_gray(path) -> np.ndarray:
    """Load a P5 file as ``(H, W)`` without conversion (used for masks/dumps)."""
    img = decode_pnm(_read(path), path)
    if img.ndim != 2:
        raise UnsupportedFormatError(f"{path}: expected a grayscale PGM")
    return img


def _load_with_pillow(path) -> np.ndarray:
    try:
        from PIL import Image
    except ImportError as exc:
        raise UnsupportedFormatError(f"{path}: only PPM/PGM supported without Pillow") from exc
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()
    except OSError as exc:
        raise UnsupportedFormatError(f"{path}: cannot decode image ({exc})") from exc


def encode_pnm(img: np.ndarray) -> bytes:
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise ValueError(f"expected uint8 image, got {img.dtype}")
    if img.ndim == 2:
        magic = b"P5"
    elif img.ndim == 3 and img.shape[2] == 3:
        magic = b"P6"
    else:
        raise ValueError(f"unsupported image shape {img.shape}")
    h, w = img.shape[:2]
    return magic + f"\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(img).tobytes()


def save_image(img: np.ndarray, path) -> None:
    """Write ``(H, W)`` as P5 or ``(H, W, 3)`` as P6."""
    try:
        Path(path).write_bytes(encode_pnm(img))
    except OSError as exc:
        raise ImageIOError(f"{path}: {exc}") from exc
