"""Multi-scale prototype augmentation.

Support images are resized to every resolution in a :class:`ScaleSet`,
extracted, average-pooled back onto the grid of the base resolution, and the
per-scale prototypes are averaged into one.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .extractor import ExtractorConfig, extract, grid_shape, resize_image
from .head import Prototype, compute_prototype
from .tensor import FeatureMap

DEFAULT_RESOLUTIONS = ((84, 84), (92, 92), (108, 108))


@dataclass(frozen=True)
class ScaleSet:
    """Resolutions as ``(height, width)``; the first one is the base."""

    resolutions: tuple = DEFAULT_RESOLUTIONS

    def __post_init__(self):
        res = tuple((int(h), int(w)) for h, w in self.resolutions)
        if not res:
            raise ParameterError("scale set is empty")
        if min(min(r) for r in res) < 2:
            raise ParameterError(f"resolutions {res} contain a side below 2")
        object.__setattr__(self, "resolutions", res)

    @classmethod
    def single(cls, base=(84, 84)):
        return cls((tuple(base),))

    @property
    def base(self):
        return self.resolutions[0]

    def base_grid(self, config):
        return grid_shape(*self.base, config)


def _pool_matrix(n, target):
    """``(target, n)`` block-averaging matrix with floor block boundaries."""
    m = np.zeros((target, n))
    for a in range(target):
        lo, hi = a * n // target, (a + 1) * n // target
        m[a, lo:hi] = 1.0 / (hi - lo)
    return m


def pool_to_grid(fm, target_w, target_h):
    """Adaptive average pooling onto a coarser (or equal) grid.

    Target row ``a`` averages source rows ``[a*h//th, (a+1)*h//th)``; columns
    likewise.
    """
    if target_w > fm.w or target_h > fm.h or target_w < 1 or target_h < 1:
        raise ParameterError(
            f"cannot pool {fm.w}x{fm.h} grid to {target_w}x{target_h}"
        )
    if (target_w, target_h) == (fm.w, fm.h):
        return fm
    rows = _pool_matrix(fm.h, target_h)
    cols = _pool_matrix(fm.w, target_w)
    out = np.einsum("ay,yxd,bx->abd", rows, fm.grid(), cols, optimize=True)
    return FeatureMap.from_grid(out)


def scaled_map(image, resolution, base_grid, config):
    """Resize, extract and pool one image onto ``base_grid = (w, h)``."""
    fm = extract(resize_image(image, resolution), config)
    return pool_to_grid(fm, *base_grid)


def fuse_scales(per_scale_maps, class_id=None):
    """Mean of per-scale prototypes; ``per_scale_maps[i]`` holds the support
    maps of one class at scale ``i``, already on a common grid."""
    protos = [compute_prototype(maps, class_id).map for maps in per_scale_maps]
    if not protos:
        raise ParameterError("no scales to fuse")
    total = protos[0].data.copy()
    for p in protos[1:]:
        total += p.data
    w, h, d = protos[0].shape
    return Prototype(class_id, FeatureMap(w, h, d, total / len(protos)))


def augmented_prototype(support_images, class_id=None, scales=ScaleSet(),
                        config=ExtractorConfig()):
    images = list(support_images)
    if not images:
        raise ParameterError("prototype needs at least one support image")
    base_grid = scales.base_grid(config)
    per_scale = [
        [scaled_map(img, res, base_grid, config) for img in images]
        for res in scales.resolutions
    ]
    return fuse_scales(per_scale, class_id)
