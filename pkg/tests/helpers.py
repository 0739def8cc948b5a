import numpy as np

from dbrn.head import Prototype
from dbrn.tensor import FeatureMap


def random_map(rng, w, h, d):
    return FeatureMap(w, h, d, rng.normal(size=(w * h, d)))


def random_grid(rng, max_r=9):
    while True:
        w, h = (int(x) for x in rng.integers(1, 4, size=2))
        if w * h <= max_r:
            return w, h


def random_episode(rng, max_n=5, max_r=9, max_d=8, queries=2):
    """Prototypes and query maps with a shared random shape."""
    n = int(rng.integers(2, max_n + 1))
    w, h = random_grid(rng, max_r)
    d = int(rng.integers(1, max_d + 1))
    qw, qh = random_grid(rng, max_r)
    protos = [Prototype(c, random_map(rng, w, h, d)) for c in range(n)]
    qs = [random_map(rng, qw, qh, d) for _ in range(queries)]
    return protos, qs


def rows(fm):
    return fm.data.tolist()


def as_nested(image):
    return np.asarray(image.pixels).tolist()
