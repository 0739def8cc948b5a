"""Run configuration and its flat ``key = value`` file format."""

from dataclasses import dataclass, fields, replace

from .augment import ScaleSet
from .errors import ParameterError
from .extractor import ExtractorConfig
from .head import HeadConfig


@dataclass(frozen=True)
class RunConfig:
    command: str = "eval"
    dataset: str = "toy"  # "toy", an image directory, or a DBRNFT01 file
    out: str = ""
    # episodes
    n_way: int = 5
    k_shot: int = 1
    q_queries: int = 15
    episodes: int = 100
    seed: int = 0
    # head
    k: int = 3
    tau: float = 10.0
    omega: float = 2.0
    use_weight: bool = True
    use_pow: bool = True
    use_protoaug: bool = True
    query_multiscale: bool = False
    scales: str = "84x84,92x92,108x108"
    # extractor
    extractor_seed: int = 0
    num_layers: int = 4
    out_dim: int = 32
    hidden_dim: int = 16
    # toy data
    data_seed: int = 0
    num_classes: int = 20
    samples_per_class: int = 50
    resolution: int = 84
    # tau fitting
    lr: float = 0.5
    steps: int = 50

    def head(self):
        return HeadConfig(k=self.k, tau=self.tau, omega=self.omega,
                          use_weight=self.use_weight, use_pow=self.use_pow,
                          use_protoaug=self.use_protoaug,
                          query_multiscale=self.query_multiscale)

    def extractor(self):
        return ExtractorConfig(seed=self.extractor_seed, num_layers=self.num_layers,
                               out_dim=self.out_dim, hidden_dim=self.hidden_dim)

    def scale_set(self):
        return ScaleSet(parse_scales(self.scales))


def parse_scales(text):
    out = []
    for part in text.split(","):
        try:
            h, w = part.strip().lower().split("x")
            out.append((int(h), int(w)))
        except ValueError:
            raise ParameterError(f"bad resolution {part!r}; expected HxW") from None
    return tuple(out)


def _coerce(kind, key, text):
    if kind is bool:
        low = text.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ParameterError(f"{key}: expected a boolean, got {text!r}")
    try:
        return kind(text.strip())
    except ValueError:
        raise ParameterError(f"{key}: cannot parse {text!r} as {kind.__name__}") from None


FIELD_TYPES = {f.name: type(f.default) for f in fields(RunConfig)}


def coerce_values(raw):
    unknown = set(raw) - set(FIELD_TYPES)
    if unknown:
        raise ParameterError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return {k: _coerce(FIELD_TYPES[k], k, v) if isinstance(v, str) and FIELD_TYPES[k] is not str
            else v for k, v in raw.items()}


def parse_config(text):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        raw[key.strip()] = value.strip()
    return coerce_values(raw)


def format_config(config):
    lines = []
    for f in fields(config):
        value = getattr(config, f.name)
        lines.append(f"{f.name} = {repr(value) if isinstance(value, float) else value}")
    return "\n".join(lines) + "\n"


def load_config(path, base=RunConfig()):
    with open(path) as f:
        return replace(base, **parse_config(f.read()))
