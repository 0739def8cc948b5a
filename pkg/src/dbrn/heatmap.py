"""Render rectify weights as brightness modulation of the query image."""

import numpy as np

from .errors import DimensionError
from .pnm import write_pgm

FLOOR = 0.25


def weight_factors(weights, grid):
    """Per-cell brightness factor ``0.25 + 0.75 * minmax(weights)``, shape ``(h, w)``.

    Constant weights normalize to 0.5.
    """
    w, h = grid
    values = np.asarray(getattr(weights, "values", weights), dtype=np.float64)
    if values.shape != (w * h,):
        raise DimensionError(f"{values.size} weights for a {w}x{h} grid")
    lo, hi = values.min(), values.max()
    norm = np.full_like(values, 0.5) if hi - lo <= 0 else (values - lo) / (hi - lo)
    return (FLOOR + (1.0 - FLOOR) * norm).reshape(h, w)


def heatmap_pixels(query_image, weights, grid):
    """Modulated 8-bit grayscale raster, shape ``(height, width)``."""
    factors = weight_factors(weights, grid)
    w, h = grid
    H, W = query_image.height, query_image.width
    cell_y = np.arange(H) * h // H
    cell_x = np.arange(W) * w // W
    upsampled = factors[cell_y][:, cell_x]
    gray = query_image.pixels.mean(axis=2)
    return np.round(np.clip(gray * upsampled, 0.0, 1.0) * 255.0).astype(np.uint8)


def render_weight_heatmap(query_image, weights, grid, out_path):
    """Write the modulated query image as a P5 graymap; returns the raster."""
    raster = heatmap_pixels(query_image, weights, grid)
    write_pgm(raster, out_path)
    return raster
