"""Images, a seeded fixed-filter convolutional extractor, and feature files.

The extractor is a stand-in for a trained backbone: ``num_layers`` blocks of
3x3 zero-padded convolution (no bias), ramp ``max(0, x)`` and non-overlapping
``s x s`` average pooling, with filters drawn once from the seed. With the
default four halving blocks an 84x84 image yields a 5x5 grid, the same grid
a ResNet-12 trunk produces at that resolution.
"""

import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import FormatError, ParameterError, ResolutionError
from .tensor import FeatureMap

FEATURE_MAGIC = b"DBRNFT01"
KERNEL = 3


@dataclass(frozen=True, eq=False)
class Image:
    """Pixels in ``[0, 1]`` with shape ``(height, width, channels)``."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.array(self.pixels, dtype=np.float64)
        if px.ndim == 2:
            px = px[:, :, None]
        if px.ndim != 3 or px.shape[2] not in (1, 3):
            raise ParameterError(f"image must be (h, w, 1|3), got shape {px.shape}")
        if px.size and (np.any(~np.isfinite(px)) or px.min() < 0.0 or px.max() > 1.0):
            raise ParameterError("pixel values must lie in [0, 1]")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def channels(self):
        return self.pixels.shape[2]

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def __hash__(self):
        return hash((self.pixels.shape, self.pixels.tobytes()))


@dataclass(frozen=True)
class ExtractorConfig:
    seed: int = 0
    num_layers: int = 4
    out_dim: int = 32
    hidden_dim: int = 16
    strides: tuple = ()

    def __post_init__(self):
        if self.num_layers < 1 or self.out_dim < 1 or self.hidden_dim < 1:
            raise ParameterError("num_layers, out_dim and hidden_dim must be positive")
        strides = tuple(int(s) for s in self.strides) or (2,) * self.num_layers
        if len(strides) != self.num_layers or min(strides) < 1:
            raise ParameterError(
                f"stride schedule {strides} does not match {self.num_layers} layers"
            )
        object.__setattr__(self, "strides", strides)

    def channels(self, in_channels):
        """(in, out) channel counts per layer."""
        widths = [in_channels] + [self.hidden_dim] * (self.num_layers - 1) + [self.out_dim]
        return list(zip(widths[:-1], widths[1:]))


@lru_cache(maxsize=32)
def _filters(config, in_channels):
    rng = np.random.default_rng(config.seed)
    filters = []
    for c_in, c_out in config.channels(in_channels):
        w = rng.uniform(-1.0, 1.0, size=(c_out, c_in, KERNEL, KERNEL))
        w -= w.mean(axis=(1, 2, 3), keepdims=True)
        w *= np.sqrt(2.0 / (c_in * KERNEL * KERNEL))
        w.setflags(write=False)
        filters.append(w)
    return tuple(filters)


def make_filters(config, in_channels):
    """Per-layer filter banks, each ``(c_out, c_in, 3, 3)``; fixed by the seed."""
    return _filters(config, int(in_channels))


def grid_shape(height, width, config):
    """Output ``(w, h)`` grid for an input of the given size."""
    h, w = height, width
    for s in config.strides:
        h, w = h // s, w // s
        if h < 1 or w < 1:
            raise ResolutionError(
                f"{height}x{width} input collapses under strides {config.strides}"
            )
    return w, h


def _conv3x3(x, weights):
    padded = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    windows = sliding_window_view(padded, (KERNEL, KERNEL), axis=(1, 2))
    # windows: (c_in, H, W, 3, 3)
    return np.tensordot(weights, windows, axes=([1, 2, 3], [0, 3, 4]))


def _avg_pool(x, s):
    _, h, w = x.shape
    h2, w2 = h // s, w // s
    total = 0.0
    for dy in range(s):
        for dx in range(s):
            total = total + x[:, dy: h2 * s: s, dx: w2 * s: s]
    return total / (s * s)


def extract(image, config=ExtractorConfig()):
    grid_shape(image.height, image.width, config)
    x = np.ascontiguousarray(image.pixels.transpose(2, 0, 1))
    for weights, s in zip(make_filters(config, image.channels), config.strides):
        x = _avg_pool(np.maximum(_conv3x3(x, weights), 0.0), s)
    return FeatureMap.from_grid(x.transpose(1, 2, 0))


def _bilinear_axis(n_in, n_out):
    if n_out == 1 or n_in == 1:
        pos = np.zeros(n_out)
    else:
        pos = np.arange(n_out) * ((n_in - 1) / (n_out - 1))
    lo = np.minimum(np.floor(pos).astype(int), n_in - 1)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, pos - lo


def resize_image(image, target):
    """Corner-aligned bilinear resize to ``target = (height, width)``."""
    th, tw = (int(t) for t in target)
    if th < 2 or tw < 2:
        raise ParameterError(f"resize target {th}x{tw} is below 2x2")
    if (th, tw) == (image.height, image.width):
        return image
    px = image.pixels
    y0, y1, fy = _bilinear_axis(image.height, th)
    x0, x1, fx = _bilinear_axis(image.width, tw)
    fy = fy[:, None, None]
    fx = fx[None, :, None]
    # lerp as a + (b - a) * t keeps constant regions exactly constant
    top = px[y0][:, x0] + (px[y0][:, x1] - px[y0][:, x0]) * fx
    bottom = px[y1][:, x0] + (px[y1][:, x1] - px[y1][:, x0]) * fx
    out = top + (bottom - top) * fy
    return Image(np.clip(out, 0.0, 1.0))


def save_features(maps, path):
    """Write maps as little-endian ``DBRNFT01``: count, then per map w, h, d
    (u32 each) and ``w*h*d`` float32 values in row-major order."""
    chunks = [FEATURE_MAGIC, struct.pack("<I", len(maps))]
    for fm in maps:
        data = fm.data.astype("<f4")
        if not np.all(np.isfinite(data)):
            raise FormatError("feature values overflow float32")
        chunks.append(struct.pack("<3I", fm.w, fm.h, fm.d))
        chunks.append(data.tobytes())
    with open(path, "wb") as f:
        f.write(b"".join(chunks))


def load_features(path):
    with open(path, "rb") as f:
        buf = f.read()
    if buf[:8] != FEATURE_MAGIC:
        raise FormatError(f"bad magic {buf[:8]!r}", 0)
    if len(buf) < 12:
        raise FormatError("truncated header", len(buf))
    (count,) = struct.unpack_from("<I", buf, 8)
    pos = 12
    maps = []
    for _ in range(count):
        if pos + 12 > len(buf):
            raise FormatError("truncated map header", pos)
        w, h, d = struct.unpack_from("<3I", buf, pos)
        pos += 12
        nbytes = 4 * w * h * d
        if pos + nbytes > len(buf):
            raise FormatError(f"truncated data for {w}x{h}x{d} map", pos)
        values = np.frombuffer(buf, dtype="<f4", count=w * h * d, offset=pos)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise FormatError("non-finite feature value", pos + 4 * int(bad[0]))
        try:
            maps.append(FeatureMap(w, h, d, values.reshape(w * h, d)))
        except ValueError as exc:
            raise FormatError(str(exc), pos) from exc
        pos += nbytes
    if pos != len(buf):
        raise FormatError(f"{len(buf) - pos} trailing bytes", pos)
    return maps
