"""Feature-map container and the small numeric kernels the head is built from.

All kernels work in float64. A descriptor whose l2 norm is below ``EPS_NORM``
is treated as dead: it normalizes to the zero vector and has cosine 0 with
everything, so a blank feature-map cell never produces NaN.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError

EPS_NORM = 1e-12


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """An ``h x w`` grid of ``d``-dimensional local descriptors.

    ``data`` has shape ``(w * h, d)``; row ``y * w + x`` holds the descriptor
    of grid cell (row ``y``, column ``x``).
    """

    w: int
    h: int
    d: int
    data: np.ndarray

    def __post_init__(self):
        if min(self.w, self.h, self.d) < 1:
            raise DimensionError(f"grid {self.w}x{self.h}x{self.d} has an empty axis")
        data = np.array(self.data, dtype=np.float64)
        if data.shape != (self.w * self.h, self.d):
            raise DimensionError(
                f"data shape {data.shape} != ({self.w * self.h}, {self.d})"
            )
        if not np.all(np.isfinite(data)):
            raise ParameterError("feature map contains non-finite values")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_grid(cls, grid):
        """Build from an ``(h, w, d)`` array."""
        grid = np.asarray(grid, dtype=np.float64)
        if grid.ndim != 3:
            raise DimensionError(f"expected (h, w, d) array, got shape {grid.shape}")
        h, w, d = grid.shape
        return cls(w=w, h=h, d=d, data=grid.reshape(h * w, d))

    @property
    def r(self):
        return self.w * self.h

    @property
    def shape(self):
        return (self.w, self.h, self.d)

    def grid(self):
        """Descriptors as an ``(h, w, d)`` array."""
        return self.data.reshape(self.h, self.w, self.d)

    def scaled(self, alpha):
        return FeatureMap(self.w, self.h, self.d, self.data * alpha)

    def __eq__(self, other):
        if not isinstance(other, FeatureMap):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.shape, self.data.tobytes()))


def l2_normalize(v):
    v = np.asarray(v, dtype=np.float64)
    norm = np.sqrt(np.dot(v, v))
    if norm < EPS_NORM:
        return np.zeros_like(v)
    return v / norm


def normalize_rows(a):
    """Row-wise :func:`l2_normalize` over the last axis."""
    a = np.asarray(a, dtype=np.float64)
    norms = np.sqrt(np.einsum("...i,...i->...", a, a))[..., None]
    safe = np.where(norms < EPS_NORM, 1.0, norms)
    return np.where(norms < EPS_NORM, 0.0, a / safe)


def cosine(u, v):
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise DimensionError(f"cosine of shapes {u.shape} and {v.shape}")
    return float(np.clip(np.dot(l2_normalize(u), l2_normalize(v)), -1.0, 1.0))


def cosine_matrix(a, b):
    """Pairwise cosines between the rows of ``a`` (r1 x d) and ``b`` (r2 x d)."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[-1] != b.shape[-1]:
        raise DimensionError(f"descriptor length {a.shape[-1]} != {b.shape[-1]}")
    return np.clip(normalize_rows(a) @ normalize_rows(b).T, -1.0, 1.0)


def top_k_sum(values, k):
    """Sum of the ``k`` largest entries along the last axis."""
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[-1]
    if not 1 <= k <= n:
        raise ParameterError(f"k={k} outside [1, {n}]")
    # sequential sum in descending order: for non-negative entries the result
    # is then exactly non-decreasing in k
    descending = -np.sort(-values, axis=-1)
    return np.ascontiguousarray(np.cumsum(descending, axis=-1)[..., k - 1])


def softmax(logits):
    """Max-shifted softmax along the last axis.

    The normalizer is summed in sorted order, so permuting the logits permutes
    the output bit-for-bit.
    """
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sort(e, axis=-1).sum(axis=-1, keepdims=True)


def log_softmax(logits):
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))
