"""Minimal PNG codec with pinned, deterministic encoder settings.

Encoder: 8-bit RGBA, filter type 0 on every scanline, one IDAT chunk,
zlib level 6. Identical pixel arrays therefore produce identical bytes,
on any platform, for as long as zlib's output stays stable (it has for
decades). No ancillary chunks are written.

Decoder: non-interlaced PNGs with bit depth 8 and color type 0 (gray),
2 (RGB), 3 (palette), 4 (gray+alpha), or 6 (RGBA); all five scanline
filters. Output is always an (h, w, 4) uint8 array.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .errors import PngDecodeError

_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_COMPRESS_LEVEL = 6

_CHANNELS = {0: 1, 2: 3, 4: 2, 6: 4}


def encode(pixels: np.ndarray) -> bytes:
    """Encode an (h, w, 4) uint8 RGBA array to PNG bytes."""
    if pixels.dtype != np.uint8 or pixels.ndim != 3 or pixels.shape[2] != 4:
        raise ValueError("expected an (h, w, 4) uint8 array")
    h, w = pixels.shape[:2]
    raw = pixels.tobytes()
    stride = w * 4
    filtered = b"".join(
        b"\x00" + raw[y * stride : (y + 1) * stride] for y in range(h)
    )
    ihdr = struct.pack(">IIBBBBB", w, h, 8, 6, 0, 0, 0)
    idat = zlib.compress(filtered, _COMPRESS_LEVEL)
    return b"".join(
        [_SIGNATURE, _chunk(b"IHDR", ihdr), _chunk(b"IDAT", idat), _chunk(b"IEND", b"")]
    )


def _chunk(tag: bytes, data: bytes) -> bytes:
    return (
        struct.pack(">I", len(data))
        + tag
        + data
        + struct.pack(">I", zlib.crc32(data, zlib.crc32(tag)))
    )


def decode(data: bytes) -> np.ndarray:
    """Decode PNG bytes to an (h, w, 4) uint8 RGBA array."""
    if len(data) < 8 or data[:8] != _SIGNATURE:
        raise PngDecodeError("not a PNG byte stream")
    pos = 8
    ihdr = None
    palette = None
    trns = None
    idat = bytearray()
    seen_iend = False
    while pos < len(data):
        if pos + 8 > len(data):
            raise PngDecodeError("truncated chunk header")
        length, tag = struct.unpack(">I4s", data[pos : pos + 8])
        body_end = pos + 8 + length
        if body_end + 4 > len(data):
            raise PngDecodeError(f"truncated {tag!r} chunk")
        body = data[pos + 8 : body_end]
        (crc,) = struct.unpack(">I", data[body_end : body_end + 4])
        if crc != zlib.crc32(body, zlib.crc32(tag)):
            raise PngDecodeError(f"bad CRC in {tag!r} chunk")
        if tag == b"IHDR":
            ihdr = struct.unpack(">IIBBBBB", body)
        elif tag == b"PLTE":
            palette = body
        elif tag == b"tRNS":
            trns = body
        elif tag == b"IDAT":
            idat.extend(body)
        elif tag == b"IEND":
            seen_iend = True
            break
        pos = body_end + 4
    if ihdr is None or not seen_iend or not idat:
        raise PngDecodeError("missing IHDR, IDAT, or IEND")

    w, h, depth, color_type, compression, filt, interlace = ihdr
    if depth != 8:
        raise PngDecodeError(f"unsupported bit depth {depth} (only 8)")
    if interlace != 0:
        raise PngDecodeError("interlaced PNGs are not supported")
    if compression != 0 or filt != 0:
        raise PngDecodeError("nonstandard compression/filter method")
    if color_type == 3:
        if palette is None or len(palette) % 3 != 0:
            raise PngDecodeError("palette image without a valid PLTE chunk")
        channels = 1
    elif color_type in _CHANNELS:
        channels = _CHANNELS[color_type]
    else:
        raise PngDecodeError(f"unsupported color type {color_type}")
    if w == 0 or h == 0:
        raise PngDecodeError("zero-sized image")

    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as e:
        raise PngDecodeError(f"IDAT decompression failed: {e}") from e
    stride = w * channels
    if len(raw) != h * (stride + 1):
        raise PngDecodeError("decompressed data has wrong length")

    img = _unfilter(raw, h, stride, channels)
    img = img.reshape(h, w, channels)
    return _to_rgba(img, color_type, palette, trns)


def _unfilter(raw: bytes, h: int, stride: int, bpp: int) -> np.ndarray:
    out = np.zeros((h, stride), dtype=np.uint8)
    prev = np.zeros(stride, dtype=np.uint8)
    for y in range(h):
        ftype = raw[y * (stride + 1)]
        line = np.frombuffer(
            raw, dtype=np.uint8, count=stride, offset=y * (stride + 1) + 1
        ).astype(np.int32)
        if ftype == 0:
            recon = line
        elif ftype == 1:  # Sub
            recon = line.copy()
            for x in range(bpp, stride):
                recon[x] = (recon[x] + recon[x - bpp]) & 0xFF
        elif ftype == 2:  # Up
            recon = (line + prev) & 0xFF
        elif ftype == 3:  # Average
            recon = line.copy()
            for x in range(stride):
                left = recon[x - bpp] if x >= bpp else 0
                recon[x] = (recon[x] + (left + int(prev[x])) // 2) & 0xFF
        elif ftype == 4:  # Paeth
            recon = line.copy()
            for x in range(stride):
                left = int(recon[x - bpp]) if x >= bpp else 0
                up = int(prev[x])
                ul = int(prev[x - bpp]) if x >= bpp else 0
                recon[x] = (recon[x] + _paeth(left, up, ul)) & 0xFF
        else:
            raise PngDecodeError(f"unknown filter type {ftype}")
        prev = recon.astype(np.uint8)
        out[y] = prev
    return out


def _paeth(a: int, b: int, c: int) -> int:
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    if pb <= pc:
        return b
    return c


def _to_rgba(
    img: np.ndarray, color_type: int, palette: bytes | None, trns: bytes | None
) -> np.ndarray:
    h, w = img.shape[:2]
    rgba = np.empty((h, w, 4), dtype=np.uint8)
    if color_type == 0:
        rgba[..., :3] = img
        rgba[..., 3] = 255
    elif color_type == 2:
        rgba[..., :3] = img
        rgba[..., 3] = 255
    elif color_type == 3:
        lut = np.frombuffer(palette, dtype=np.uint8).reshape(-1, 3)
        idx = img[..., 0]
        if idx.max(initial=0) >= len(lut):
            raise PngDecodeError("palette index out of range")
        alpha_lut = np.full(len(lut), 255, dtype=np.uint8)
        if trns is not None:
            alpha_lut[: min(len(trns), len(lut))] = np.frombuffer(
                trns[: len(lut)], dtype=np.uint8
            )
        rgba[..., :3] = lut[idx]
        rgba[..., 3] = alpha_lut[idx]
    elif color_type == 4:
        rgba[..., :3] = img[..., :1]
        rgba[..., 3] = img[..., 1]
    else:  # 6
        rgba[:] = img
    return rgba
