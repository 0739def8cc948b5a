"""Datasets, N-way K-shot episodes, episodic evaluation and the ablation grid."""

import hashlib
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .augment import ScaleSet, fuse_scales, pool_to_grid
from .errors import ParameterError, SamplingError
from .extractor import ExtractorConfig, Image, extract, load_features, resize_image
from .head import HeadConfig, class_logits, compute_prototype, predict
from .pnm import read_pnm, write_pnm
from .tensor import FeatureMap

TIE_BREAK = "lowest class index"

# Published ResNet-12 results, quoted for context only; the toy setup here
# does not attempt them.
REFERENCE_RESULTS = (
    "miniImageNet 5-way 1-shot 67.01 +/- 0.28",
    "miniImageNet 5-way 5-shot 83.33 +/- 0.19",
    "CUB 5-way 1-shot 75.78 +/- 0.27",
)


@dataclass
class Dataset:
    """Items grouped by class; an item is an :class:`Image` or a :class:`FeatureMap`."""

    classes: list
    items: list
    split: str = "test"

    def __post_init__(self):
        if len(self.classes) != len(self.items):
            raise ParameterError("one item list per class is required")

    @property
    def is_features(self):
        return any(isinstance(it, FeatureMap) for group in self.items for it in group)

    def __len__(self):
        return len(self.classes)


@dataclass(frozen=True)
class Episode:
    n_way: int
    k_shot: int
    q_queries: int
    classes: tuple
    support: tuple  # (episode label, item index) pairs, class-major
    queries: tuple

    @property
    def support_labels(self):
        return np.array([lab for lab, _ in self.support])

    @property
    def query_labels(self):
        return np.array([lab for lab, _ in self.queries])

    def digest(self):
        h = hashlib.sha256()
        h.update(repr((self.classes, self.support, self.queries)).encode())
        return h.hexdigest()[:16]


# -- toy data ---------------------------------------------------------------

def _class_texture(c, u, v):
    """Texture of class ``c`` in object-centred coordinates ``u, v`` (unit radius)."""
    family, variant = c % 4, c // 4
    freq = 2.0 + 1.3 * variant
    angle = (variant * 0.61 + family * 0.37) * math.pi
    a = u * math.cos(angle) + v * math.sin(angle)
    b = -u * math.sin(angle) + v * math.cos(angle)
    if family == 0:  # bars
        t = np.cos(2 * math.pi * freq * a)
    elif family == 1:  # rings
        t = np.cos(2 * math.pi * freq * np.hypot(u, v) + variant)
    elif family == 2:  # blob lattice
        t = np.cos(2 * math.pi * freq * a) * np.cos(2 * math.pi * freq * b)
        t = 2.0 * np.maximum(t, 0.0) ** 2 - 1.0
    else:  # checker
        t = np.sign(np.cos(2 * math.pi * freq * a) * np.cos(2 * math.pi * 0.5 * freq * b))
    return t


def _toy_image(c, rng, resolution):
    n = resolution
    ys, xs = np.mgrid[0:n, 0:n] / (n - 1) * 2.0 - 1.0
    scale = rng.uniform(0.45, 0.8)
    cy, cx = rng.uniform(-0.3, 0.3, size=2)
    u, v = (xs - cx) / scale, (ys - cy) / scale
    mask = 1.0 / (1.0 + np.exp((np.hypot(u, v) - 1.0) * 12.0))
    obj = 0.5 + 0.4 * _class_texture(c, u, v)
    # background: a few random soft blobs plus pixel noise
    bg = np.full((n, n), rng.uniform(0.3, 0.7))
    for _ in range(3):
        by, bx = rng.uniform(-1, 1, size=2)
        rad = rng.uniform(0.1, 0.4)
        bg += rng.uniform(-0.3, 0.3) * np.exp(-((xs - bx) ** 2 + (ys - by) ** 2) / (2 * rad ** 2))
    img = mask * obj + (1 - mask) * bg + rng.normal(0.0, 0.05, size=(n, n))
    return Image(np.clip(img, 0.0, 1.0))


def generate_toy_dataset(seed=0, num_classes=20, samples_per_class=50, resolution=84):
    """Synthetic shape dataset: each class is a textured disc family (bars,
    rings, blob lattices, checkers at class-specific frequency and angle)
    drawn with jittered position and size over a cluttered background."""
    if num_classes < 2:
        raise ParameterError("need at least two classes")
    if resolution < 2:
        raise ParameterError("resolution must be at least 2")
    items = []
    for c in range(num_classes):
        rng = np.random.default_rng([seed, c])
        items.append([_toy_image(c, rng, resolution) for _ in range(samples_per_class)])
    return Dataset([f"class_{c:02d}" for c in range(num_classes)], items)


# -- disk I/O ---------------------------------------------------------------

def save_image_dataset(dataset, root):
    os.makedirs(root, exist_ok=True)
    for name, group in zip(dataset.classes, dataset.items):
        cdir = os.path.join(root, name)
        os.makedirs(cdir, exist_ok=True)
        for i, img in enumerate(group):
            ext = "pgm" if img.channels == 1 else "ppm"
            write_pnm(img, os.path.join(cdir, f"{i:04d}.{ext}"))


def load_dataset(path, split="test"):
    """Load a directory of per-class P5/P6 images, or a feature file with a
    ``<path>.labels`` sidecar (one class name per map)."""
    if os.path.isdir(path):
        classes, items = [], []
        for name in sorted(os.listdir(path)):
            cdir = os.path.join(path, name)
            if not os.path.isdir(cdir):
                continue
            files = sorted(f for f in os.listdir(cdir) if f.endswith((".pgm", ".ppm")))
            classes.append(name)
            items.append([read_pnm(os.path.join(cdir, f)) for f in files])
        return Dataset(classes, items, split)
    maps = load_features(path)
    with open(path + ".labels") as f:
        labels = [line.strip() for line in f if line.strip()]
    if len(labels) != len(maps):
        raise ParameterError(f"{len(labels)} labels for {len(maps)} feature maps")
    classes = sorted(set(labels), key=labels.index)
    items = [[m for m, lab in zip(maps, labels) if lab == c] for c in classes]
    return Dataset(classes, items, split)


# -- sampling ---------------------------------------------------------------

def sample_episode(dataset, n_way=5, k_shot=1, q_queries=15, rng_seed=0):
    if min(n_way, k_shot, q_queries) < 1:
        raise ParameterError("n_way, k_shot and q_queries must be positive")
    need = k_shot + q_queries
    eligible = [c for c, group in enumerate(dataset.items) if len(group) >= need]
    if len(dataset.items) < n_way:
        raise SamplingError(f"need {n_way} classes, dataset has {len(dataset.items)}")
    if len(eligible) < n_way:
        short = min(len(g) for g in dataset.items)
        raise SamplingError(
            f"only {len(eligible)} classes have {need} items (smallest has {short}); "
            f"need {n_way}"
        )
    rng = np.random.default_rng(rng_seed)
    classes = tuple(int(c) for c in rng.choice(eligible, size=n_way, replace=False))
    support, queries = [], []
    for label, c in enumerate(classes):
        picked = rng.choice(len(dataset.items[c]), size=need, replace=False)
        support += [(label, int(i)) for i in picked[:k_shot]]
        queries += [(label, int(i)) for i in picked[k_shot:]]
    return Episode(n_way, k_shot, q_queries, classes, tuple(support), tuple(queries))


def episode_seed(seed, index):
    return np.random.SeedSequence([seed, index])


# -- evaluation -------------------------------------------------------------

class FeatureCache:
    """Memoized per-item feature maps, pooled onto the base grid."""

    def __init__(self, dataset, extractor_config=ExtractorConfig(), scales=ScaleSet()):
        self.dataset = dataset
        self.config = extractor_config
        self.scales = scales
        self._maps = {}
        self._base_grid = None

    @property
    def base_grid(self):
        if self._base_grid is None:
            if self.dataset.is_features:
                fm = next(it for g in self.dataset.items for it in g)
                self._base_grid = (fm.w, fm.h)
            else:
                self._base_grid = self.scales.base_grid(self.config)
        return self._base_grid

    def get(self, c, i, resolution=None):
        item = self.dataset.items[c][i]
        if isinstance(item, FeatureMap):
            if resolution not in (None, self.scales.base):
                raise ParameterError(
                    "precomputed features cannot be rescaled; disable protoaug"
                )
            return item
        resolution = resolution or self.scales.base
        key = (c, i, resolution)
        fm = self._maps.get(key)
        if fm is None:
            fm = extract(resize_image(item, resolution), self.config)
            fm = pool_to_grid(fm, *self.base_grid)
            self._maps[key] = fm
        return fm


def episode_prototypes(episode, cache, config):
    scales = cache.scales.resolutions if config.use_protoaug else (cache.scales.base,)
    protos = []
    for label, c in enumerate(episode.classes):
        idx = [i for lab, i in episode.support if lab == label]
        if config.use_protoaug:
            per_scale = [[cache.get(c, i, res) for i in idx] for res in scales]
            protos.append(fuse_scales(per_scale, label))
        else:
            protos.append(compute_prototype([cache.get(c, i) for i in idx], label))
    return protos


def episode_logits(episode, cache, config):
    """Query logits ``(n_way * q_queries, n_way)``."""
    protos = episode_prototypes(episode, cache, config)
    scales = cache.scales.resolutions if config.query_multiscale else (cache.scales.base,)
    total = None
    for res in scales:
        maps = [cache.get(episode.classes[lab], i, res) for lab, i in episode.queries]
        logits = class_logits(protos, maps, config)
        total = logits if total is None else total + logits
    return total / len(scales)


@dataclass
class EvalReport:
    label: str
    mean: float
    ci95: float
    num_episodes: int
    accuracies: list
    config: dict = field(default_factory=dict)
    episode_hashes: list = field(default_factory=list)
    tie_break: str = TIE_BREAK

    @classmethod
    def from_accuracies(cls, label, accuracies, config=None, episode_hashes=None):
        acc = np.asarray(accuracies, dtype=np.float64)
        n = len(acc)
        return cls(
            label=label,
            mean=float(acc.mean()) if n else float("nan"),
            ci95=ci95(acc),
            num_episodes=n,
            accuracies=[float(a) for a in acc],
            config=dict(config or {}),
            episode_hashes=list(episode_hashes or []),
        )

    @property
    def stream_digest(self):
        return hashlib.sha256("".join(self.episode_hashes).encode()).hexdigest()[:16]

    def key_values(self):
        kv = {
            "label": self.label,
            "mean": repr(self.mean),
            "ci95": repr(self.ci95),
            "num_episodes": str(self.num_episodes),
            "tie_break": self.tie_break,
            "episode_stream": self.stream_digest,
        }
        kv.update({k: str(v) for k, v in sorted(self.config.items())})
        kv["accuracies"] = ",".join(repr(a) for a in self.accuracies)
        return kv


def ci95(accuracies):
    acc = np.asarray(accuracies, dtype=np.float64)
    if len(acc) == 0:
        return float("nan")
    return float(1.96 * acc.std() / math.sqrt(len(acc)))


def format_reports(reports):
    """Line table followed by one ``[run]`` key-value block per report."""
    lines = ["# dbrn episodic evaluation", f"# argmax tie-break: {TIE_BREAK}"]
    lines += [f"# reference, not reproduced here: {r}" for r in REFERENCE_RESULTS]
    lines.append(f"{'label':<26}{'mean_acc':>10}{'ci95':>10}{'episodes':>10}")
    for r in reports:
        lines.append(f"{r.label:<26}{r.mean:>10.4f}{r.ci95:>10.4f}{r.num_episodes:>10d}")
    for r in reports:
        lines.append("")
        lines.append("[run]")
        lines += [f"{k} = {v}" for k, v in r.key_values().items()]
    return "\n".join(lines) + "\n"


def parse_reports(text):
    """Key-value blocks of :func:`format_reports` as a list of dicts."""
    blocks, current = [], None
    for line in text.splitlines():
        if line == "[run]":
            current = {}
            blocks.append(current)
        elif current is not None and " = " in line:
            k, v = line.split(" = ", 1)
            current[k] = v
    return blocks


def evaluate(dataset, head_config=HeadConfig(), scale_set=ScaleSet(),
             extractor_config=ExtractorConfig(), n_way=5, k_shot=1, q_queries=15,
             num_episodes=100, seed=0, label=None, cache=None):
    cache = cache or FeatureCache(dataset, extractor_config, scale_set)
    accs, hashes = [], []
    for e in range(num_episodes):
        ep = sample_episode(dataset, n_way, k_shot, q_queries, episode_seed(seed, e))
        pred = predict(episode_logits(ep, cache, head_config))
        accs.append(float(np.mean(pred == ep.query_labels)))
        hashes.append(ep.digest())
    config = head_config.to_dict()
    config.update(n_way=n_way, k_shot=k_shot, q_queries=q_queries, seed=seed,
                  scales=";".join(f"{h}x{w}" for h, w in scale_set.resolutions))
    return EvalReport.from_accuracies(label or head_config.label, accs, config, hashes)


ABLATION_ROWS = (
    ("baseline", dict(use_pow=False, use_weight=False, use_protoaug=False)),
    ("weight", dict(use_pow=False, use_weight=True, use_protoaug=False)),
    ("weight+pow", dict(use_pow=True, use_weight=True, use_protoaug=False)),
    ("weight+pow+protoaug", dict(use_pow=True, use_weight=True, use_protoaug=True)),
)


def ablation_run(dataset, base_config=HeadConfig(), num_episodes=100, seed=0,
                 scale_set=ScaleSet(), extractor_config=ExtractorConfig(),
                 n_way=5, k_shot=1, q_queries=15):
    """The four toggle rows, all on the same episode stream."""
    cache = FeatureCache(dataset, extractor_config, scale_set)
    return [
        evaluate(dataset, replace(base_config, **toggles), scale_set, extractor_config,
                 n_way, k_shot, q_queries, num_episodes, seed, label=name, cache=cache)
        for name, toggles in ABLATION_ROWS
    ]
