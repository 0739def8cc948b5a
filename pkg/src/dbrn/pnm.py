"""Binary portable graymap / pixmap (P5 / P6) reading and writing."""

import numpy as np

from .errors import FormatError
from .extractor import Image


def _tokens(buf, count, pos):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out = []
    n = len(buf)
    while len(out) < count:
        while pos < n and buf[pos:pos + 1].isspace():
            pos += 1
        if pos < n and buf[pos:pos + 1] == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not buf[pos:pos + 1].isspace() and buf[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise FormatError("truncated header", pos)
        out.append((buf[start:pos], start))
    return out, pos


def read_pnm(path):
    with open(path, "rb") as f:
        buf = f.read()
    magic = buf[:2]
    if magic not in (b"P5", b"P6"):
        raise FormatError(f"unsupported magic {magic!r}", 0)
    channels = 1 if magic == b"P5" else 3
    toks, pos = _tokens(buf, 3, 2)
    try:
        width, height, maxval = (int(t) for t, _ in toks)
    except ValueError:
        raise FormatError("non-integer header field", toks[0][1]) from None
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise FormatError(f"bad header {width}x{height} maxval {maxval}", 2)
    pos += 1  # single whitespace before raster
    dtype = ">u1" if maxval < 256 else ">u2"
    count = width * height * channels
    nbytes = count * np.dtype(dtype).itemsize
    if len(buf) < pos + nbytes:
        raise FormatError("truncated raster", len(buf))
    raster = np.frombuffer(buf, dtype=dtype, count=count, offset=pos)
    if raster.max(initial=0) > maxval:
        raise FormatError("sample exceeds maxval", pos)
    pixels = raster.reshape(height, width, channels).astype(np.float64) / maxval
    return Image(pixels)


def to_bytes(image):
    """8-bit samples, rounded to nearest."""
    return np.round(image.pixels * 255.0).astype(np.uint8)


def write_pnm(image, path):
    samples = to_bytes(image)
    magic = b"P5" if image.channels == 1 else b"P6"
    header = b"%s\n%d %d\n255\n" % (magic, image.width, image.height)
    with open(path, "wb") as f:
        f.write(header + samples.tobytes())


def write_pgm(gray, path):
    """Write a 2-D ``uint8`` array as P5."""
    gray = np.ascontiguousarray(gray, dtype=np.uint8)
    h, w = gray.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h) + gray.tobytes())
