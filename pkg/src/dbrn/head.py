"""Prototype construction, bias-rectify weights and scaled-cosine top-k scoring.

For a query map with descriptors ``v_j`` and a class prototype with
descriptors ``u_i`` the class logit is

    sum_j  W_j * (sum of the k largest of  tau * cos(u_i, v_j)  over i)

where ``W_j`` is the query position's co-occurrence weight against that same
prototype: ``raw_j = sum_i max(0, cos(u_i, v_j)) ** omega`` rescaled so the
weights average to one. Switching weights off sets ``W = 1`` and leaves the
plain local-descriptor k-NN score.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .tensor import (
    EPS_NORM,
    FeatureMap,
    cosine_matrix,
    log_softmax,
    normalize_rows,
    softmax,
    top_k_sum,
)

TAU_MIN, TAU_MAX = 1e-3, 1e3


@dataclass(frozen=True)
class Prototype:
    class_id: object
    map: FeatureMap


@dataclass(frozen=True, eq=False)
class RectifyWeights:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 1 or np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ParameterError("rectify weights must be a finite non-negative vector")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def uniform(cls, r):
        return cls(np.ones(r))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class HeadConfig:
    k: int = 3
    tau: float = 10.0
    omega: float = 2.0
    use_weight: bool = True
    use_pow: bool = True
    use_protoaug: bool = True
    # average query logits over the scale set as well (off: queries at base only)
    query_multiscale: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError(f"k must be positive, got {self.k}")
        if not self.tau > 0:
            raise ParameterError(f"tau must be positive, got {self.tau}")
        if not self.omega > 0:
            raise ParameterError(f"omega must be positive, got {self.omega}")

    @property
    def exponent(self):
        return self.omega if self.use_pow else 1.0

    @property
    def label(self):
        parts = [n for n, on in (("weight", self.use_weight), ("pow", self.use_pow),
                                 ("protoaug", self.use_protoaug)) if on]
        return "+".join(parts) if parts else "baseline"

    def to_dict(self):
        return asdict(self)


def compute_prototype(support_maps, class_id=None):
    """Cell-wise mean of the support maps of one class."""
    maps = list(support_maps)
    if not maps:
        raise ParameterError("prototype needs at least one support map")
    shape = maps[0].shape
    for fm in maps[1:]:
        if fm.shape != shape:
            raise DimensionError(f"support map shape {fm.shape} != {shape}")
    total = maps[0].data.copy()
    for fm in maps[1:]:
        total += fm.data
    w, h, d = shape
    return Prototype(class_id, FeatureMap(w, h, d, total / len(maps)))


def _normalize_raw(raw):
    """Mean-one rescaling over the last axis, uniform where the mass vanishes."""
    r = raw.shape[-1]
    mass = raw.sum(axis=-1, keepdims=True)
    dead = mass < EPS_NORM
    return np.where(dead, 1.0, r * raw / np.where(dead, 1.0, mass))


def _raise_power(cos, exponent):
    clamped = np.maximum(cos, 0.0)
    if exponent == 1.0:
        return clamped
    return clamped ** exponent


def rectify_weights(query_map, reference, omega=2.0, use_pow=True):
    ref = reference.map if isinstance(reference, Prototype) else reference
    if query_map.d != ref.d:
        raise DimensionError(f"query d={query_map.d} != reference d={ref.d}")
    cos = cosine_matrix(ref.data, query_map.data)  # (r_ref, r_q)
    raw = _raise_power(cos, omega if use_pow else 1.0).sum(axis=0)
    return RectifyWeights(_normalize_raw(raw))


def similarity(proto, query_map, weights, k, tau):
    """Weighted sum over query positions of each position's top-k scaled cosines."""
    if not 1 <= k <= proto.map.r:
        raise ParameterError(f"k={k} outside [1, {proto.map.r}]")
    if len(weights) != query_map.r:
        raise DimensionError(f"{len(weights)} weights for {query_map.r} query positions")
    cos = cosine_matrix(query_map.data, proto.map.data)  # (r_q, r_proto)
    per_position = top_k_sum(tau * cos, k)
    return float(np.sum(weights.values * per_position))


def _stack(maps):
    return np.stack([fm.data for fm in maps])


def _check_compatible(prototypes, query_maps, k):
    if len(prototypes) < 2:
        raise ParameterError("classification needs at least two prototypes")
    d = prototypes[0].map.d
    r_p = prototypes[0].map.r
    for p in prototypes:
        if p.map.d != d or p.map.r != r_p:
            raise DimensionError("prototypes disagree in shape")
    for q in query_maps:
        if q.d != d:
            raise DimensionError(f"query d={q.d} != prototype d={d}")
    r_q = {q.r for q in query_maps}
    if len(r_q) > 1:
        raise DimensionError("query maps disagree in grid size")
    if not 1 <= k <= r_p:
        raise ParameterError(f"k={k} outside [1, {r_p}]")


def pairwise_cosines(prototypes, query_maps):
    """Cosines of shape ``(queries, classes, r_q, r_proto)``."""
    p = normalize_rows(_stack([pr.map for pr in prototypes]))
    q = normalize_rows(_stack(query_maps))
    m, r_q, d = q.shape
    flat = q.reshape(m * r_q, d)
    # one product per class so a class's scores never depend on its position
    cos = np.stack([(flat @ pc.T).reshape(m, r_q, -1) for pc in p], axis=1)
    return np.clip(cos, -1.0, 1.0)


def batch_weights(cos, config):
    """Rectify weights ``(queries, classes, r_q)`` from :func:`pairwise_cosines`."""
    if not config.use_weight:
        return np.ones(cos.shape[:-1])
    return _normalize_raw(_raise_power(cos, config.exponent).sum(axis=-1))


def class_logits(prototypes, query_maps, config):
    """Logits ``(queries, classes)`` for a batch of queries."""
    query_maps = list(query_maps)
    _check_compatible(prototypes, query_maps, config.k)
    cos = pairwise_cosines(prototypes, query_maps)
    per_position = top_k_sum(config.tau * cos, config.k)
    return np.sum(batch_weights(cos, config) * per_position, axis=-1)


def knn_logits(prototypes, query_maps, k, tau):
    """Unweighted local-descriptor k-NN logits, the reference baseline."""
    query_maps = list(query_maps)
    _check_compatible(prototypes, query_maps, k)
    per_position = top_k_sum(tau * pairwise_cosines(prototypes, query_maps), k)
    return np.sum(per_position, axis=-1)


def classify(prototypes, query_map, config=HeadConfig()):
    return softmax(class_logits(prototypes, [query_map], config)[0])


def predict(probs_or_logits):
    """Argmax along the last axis; ties go to the lowest class index."""
    return np.argmax(probs_or_logits, axis=-1)


def cross_entropy(logits, labels):
    """Mean cross-entropy of ``(queries, classes)`` logits."""
    logits = np.atleast_2d(logits)
    labels = np.asarray(labels)
    return float(-np.mean(log_softmax(logits)[np.arange(len(labels)), labels]))


def tau_gradient(logits, labels, tau):
    """d(mean cross-entropy)/d(tau) for logits that are linear in tau."""
    if not tau > 0:
        raise ParameterError(f"tau must be positive, got {tau}")
    logits = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    labels = np.asarray(labels)
    delta = softmax(logits)
    delta[np.arange(len(labels)), labels] -= 1.0
    return float(np.mean(np.sum(delta * logits, axis=-1)) / tau)


def fit_tau(episodes, learning_rate, steps, tau=10.0):
    """Gradient descent on tau alone.

    ``episodes`` is a sequence of ``(unit_logits, labels)`` pairs where
    ``unit_logits`` are the class logits computed at ``tau = 1``. Returns the
    final tau and the loss trace (initial loss plus one entry per step).
    """
    if steps < 1:
        raise ParameterError("steps must be >= 1")
    if learning_rate < 0:
        raise ParameterError("learning_rate must be non-negative")
    episodes = [(np.asarray(s, dtype=np.float64), np.asarray(y)) for s, y in episodes]

    def loss_and_grad(t):
        losses = [cross_entropy(t * s, y) for s, y in episodes]
        grads = [tau_gradient(t * s, y, t) for s, y in episodes]
        return float(np.mean(losses)), float(np.mean(grads))

    loss, grad = loss_and_grad(tau)
    trace = [loss]
    for _ in range(steps):
        if learning_rate and grad:
            tau = float(np.clip(tau - learning_rate * grad, TAU_MIN, TAU_MAX))
        loss, grad = loss_and_grad(tau)
        trace.append(loss)
    return tau, trace
