"""Reference classifier (hashed character n-gram logistic regression trained
with Adam), lexicon zero-shot scorer, and the prompt template used by remote
backends.

The classifier is deliberately small and fully deterministic so the whole
loop can run and be tested offline; a remote endpoint can play the same role
through RemoteScorer.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Protocol, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .core import (
    DataError,
    DataPoint,
    LabelLoopError,
    OracleProtocolError,
    OracleTransportError,
    Pool,
    stable_hash64,
)

DEFAULT_FEATURE_DIM = 2**18
DEFAULT_NGRAM_ORDERS = (1, 2, 3)


def _ngram_slot(gram: str, feature_dim: int) -> int:
    # blake2b keeps hashing stable across platforms and interpreter runs
    # (Python's builtin hash is salted per process).
    return stable_hash64(gram) & (feature_dim - 1)


def featurize(
    text: str,
    ngram_orders: Sequence[int] = DEFAULT_NGRAM_ORDERS,
    feature_dim: int = DEFAULT_FEATURE_DIM,
) -> tuple[np.ndarray, np.ndarray]:
    """Hash character n-gram counts into [0, feature_dim) and L2-normalize.

    Returns (indices, values) with indices sorted ascending. N-grams are
    taken at Unicode scalar granularity, so CJK text works unchanged.
    """
    if not text:
        raise DataError("cannot featurize empty text")
    if feature_dim < 2 or feature_dim & (feature_dim - 1):
        raise DataError(f"feature_dim must be a power of two >= 2, got {feature_dim}")
    counts: dict[int, float] = {}
    n = len(text)
    for order in ngram_orders:
        for i in range(n - order + 1):
            slot = _ngram_slot(text[i : i + order], feature_dim)
            counts[slot] = counts.get(slot, 0.0) + 1.0
    indices = np.fromiter(sorted(counts), dtype=np.int64, count=len(counts))
    values = np.array([counts[i] for i in indices], dtype=np.float64)
    norm = math.sqrt(float(np.dot(values, values)))
    if norm > 0:
        values /= norm
    return indices, values


def featurize_pool(
    texts: Iterable[str],
    ngram_orders: Sequence[int] = DEFAULT_NGRAM_ORDERS,
    feature_dim: int = DEFAULT_FEATURE_DIM,
) -> sp.csr_matrix:
    """Stack featurize() rows into a CSR matrix (row order = input order)."""
    indptr = [0]
    all_idx: list[np.ndarray] = []
    all_val: list[np.ndarray] = []
    for text in texts:
        idx, val = featurize(text, ngram_orders, feature_dim)
        all_idx.append(idx)
        all_val.append(val)
        indptr.append(indptr[-1] + len(idx))
    data = np.concatenate(all_val) if all_val else np.empty(0)
    cols = np.concatenate(all_idx) if all_idx else np.empty(0, dtype=np.int64)
    return sp.csr_matrix(
        (data, cols, np.array(indptr)), shape=(len(indptr) - 1, feature_dim)
    )


@dataclass
class ClassifierParams:
    weights: np.ndarray  # shape (feature_dim,)
    bias: float
    feature_dim: int = DEFAULT_FEATURE_DIM
    ngram_orders: tuple[int, ...] = DEFAULT_NGRAM_ORDERS

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.feature_dim < 2:
            raise DataError("feature_dim must be >= 2")
        if not np.all(np.isfinite(self.weights)) or not math.isfinite(self.bias):
            raise DataError("classifier parameters must be finite")

    @classmethod
    def fresh(
        cls,
        feature_dim: int = DEFAULT_FEATURE_DIM,
        ngram_orders: Sequence[int] = DEFAULT_NGRAM_ORDERS,
    ) -> "ClassifierParams":
        # All-zero init: deterministic, predicts 0.5 everywhere.
        return cls(
            weights=np.zeros(feature_dim),
            bias=0.0,
            feature_dim=feature_dim,
            ngram_orders=tuple(ngram_orders),
        )

    def copy(self) -> "ClassifierParams":
        return ClassifierParams(
            self.weights.copy(), self.bias, self.feature_dim, self.ngram_orders
        )


def predict_proba(params: ClassifierParams, point: DataPoint | str) -> float:
    """sigmoid(w.x + b); strictly inside (0,1) for finite params."""
    text = point.text if isinstance(point, DataPoint) else point
    idx, val = featurize(text, params.ngram_orders, params.feature_dim)
    z = float(np.dot(params.weights[idx], val)) + params.bias
    return float(expit(z))


def predict_proba_matrix(params: ClassifierParams, X: sp.csr_matrix) -> np.ndarray:
    return expit(X @ params.weights + params.bias)


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    weight_decay: float = 0.01
    epsilon: float = 1e-8

    @classmethod
    def fresh(cls, dim: int, **kwargs) -> "AdamState":
        return cls(m=np.zeros(dim), v=np.zeros(dim), **kwargs)


def adam_step(
    state: AdamState, params: np.ndarray, gradient: np.ndarray
) -> tuple[AdamState, np.ndarray]:
    """One Adam update. `gradient` must already include any L2 decay term."""
    gradient = np.asarray(gradient, dtype=np.float64)
    if not np.all(np.isfinite(gradient)):
        raise DataError("non-finite gradient passed to adam_step")
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * gradient
    v = state.beta2 * state.v + (1.0 - state.beta2) * gradient**2
    m_hat = m / (1.0 - state.beta1**t)
    v_hat = v / (1.0 - state.beta2**t)
    new_params = params - state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)
    new_state = AdamState(
        m=m,
        v=v,
        t=t,
        lr=state.lr,
        beta1=state.beta1,
        beta2=state.beta2,
        weight_decay=state.weight_decay,
        epsilon=state.epsilon,
    )
    return new_state, new_params


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    """Reference-classifier training knobs.

    The stored `remote_lr` (1e-5) is the fine-tuning default for remote
    backends; the reference logistic model would be untrainable at that rate
    in a few epochs, so its own default is 0.05.
    """

    epochs: int = 30
    batch_size: int = 16
    lr: float = 0.05
    remote_lr: float = 1e-5
    beta1: float = 0.9
    beta2: float = 0.999
    weight_decay: float = 0.01
    epsilon: float = 1e-8
    feature_dim: int = DEFAULT_FEATURE_DIM
    ngram_orders: tuple[int, ...] = DEFAULT_NGRAM_ORDERS
    warm_start: bool = False

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "lr": self.lr,
            "remote_lr": self.remote_lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "weight_decay": self.weight_decay,
            "epsilon": self.epsilon,
            "feature_dim": self.feature_dim,
            "ngram_orders": list(self.ngram_orders),
            "warm_start": self.warm_start,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        if "ngram_orders" in d:
            d["ngram_orders"] = tuple(d["ngram_orders"])
        return cls(**d)


def bce_loss_and_grad(
    theta: np.ndarray, X: sp.csr_matrix, y: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean binary cross-entropy and its gradient wrt theta = [weights, bias]."""
    w, b = theta[:-1], theta[-1]
    z = X @ w + b
    p = expit(z)
    eps = 1e-12
    loss = float(-np.mean(y * np.log(p + eps) + (1.0 - y) * np.log(1.0 - p + eps)))
    resid = (p - y) / len(y)
    grad = np.empty_like(theta)
    grad[:-1] = X.T @ resid
    grad[-1] = float(np.sum(resid))
    return loss, grad


def train(
    params: ClassifierParams,
    annotations: Sequence[tuple[str, bool]],
    pool: Pool,
    epochs: int,
    adam: AdamState,
    rng: np.random.Generator,
    X: Optional[sp.csr_matrix] = None,
    row_of: Optional[dict[str, int]] = None,
    batch_size: int = 16,
) -> tuple[ClassifierParams, float]:
    """Train on (point_id, label) pairs; returns (params, final epoch mean loss).

    Example order is reshuffled per epoch by `rng`; L2 weight decay is added
    to the raw gradient (weights only, not bias). Pass a precomputed pool
    feature matrix `X` with `row_of` (id -> row) to avoid re-featurizing.
    Sets smaller than `batch_size` fall back to full-batch steps.
    """
    if not annotations:
        raise DataError("labeled set is empty")
    labels = {bool(lbl) for _, lbl in annotations}
    if len(labels) < 2:
        raise DataError("single-class labeled set (broken cold-start?)")

    ids = [pid for pid, _ in annotations]
    y = np.array([1.0 if lbl else 0.0 for _, lbl in annotations])
    if X is not None and row_of is not None:
        rows = [row_of[pid] for pid in ids]
        Xa = X[rows]
    else:
        Xa = featurize_pool(
            (pool.get(pid).text for pid in ids), params.ngram_orders, params.feature_dim
        )

    theta = np.concatenate([params.weights, [params.bias]])
    state = adam
    n = len(ids)
    batch = min(max(batch_size, 1), n)
    final_loss = math.nan
    for _ in range(epochs):
        order = rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, batch):
            sel = order[start : start + batch]
            loss, grad = bce_loss_and_grad(theta, Xa[sel], y[sel])
            grad[:-1] += state.weight_decay * theta[:-1]
            state, theta = adam_step(state, theta, grad)
            epoch_losses.append(loss)
        final_loss = float(np.mean(epoch_losses))
    trained = ClassifierParams(
        weights=theta[:-1],
        bias=float(theta[-1]),
        feature_dim=params.feature_dim,
        ngram_orders=params.ngram_orders,
    )
    return trained, final_loss


def train_from_config(
    annotations: Sequence[tuple[str, bool]],
    pool: Pool,
    config: TrainConfig,
    rng: np.random.Generator,
    X: Optional[sp.csr_matrix] = None,
    row_of: Optional[dict[str, int]] = None,
    warm_params: Optional[ClassifierParams] = None,
) -> tuple[ClassifierParams, float]:
    """Fresh-initialization training driven by a TrainConfig."""
    if config.warm_start and warm_params is not None:
        params = warm_params.copy()
    else:
        params = ClassifierParams.fresh(config.feature_dim, config.ngram_orders)
    adam = AdamState.fresh(
        config.feature_dim + 1,
        lr=config.lr,
        beta1=config.beta1,
        beta2=config.beta2,
        weight_decay=config.weight_decay,
        epsilon=config.epsilon,
    )
    return train(
        params, annotations, pool, config.epochs, adam, rng, X, row_of,
        batch_size=config.batch_size,
    )


# ---------------------------------------------------------------------------
# Zero-shot lexicon scorer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroShotLexicon:
    positive_terms: dict[str, float]
    negative_terms: dict[str, float] = field(default_factory=dict)
    temperature: float = 1.0

    def __post_init__(self):
        if not self.positive_terms:
            raise DataError("lexicon needs at least one positive term")
        if self.temperature <= 0:
            raise DataError("lexicon temperature must be > 0")


def zero_shot_score(lexicon: ZeroShotLexicon, point: DataPoint | str) -> float:
    """sigmoid((sum of positive-term weights present - negative)/temperature).

    Term presence is binary substring containment; a term occurring twice
    counts once.
    """
    text = point.text if isinstance(point, DataPoint) else point
    score = sum(w for term, w in lexicon.positive_terms.items() if term in text)
    score -= sum(w for term, w in lexicon.negative_terms.items() if term in text)
    return float(expit(score / lexicon.temperature))


def load_lexicon(path: str, temperature: float = 1.0) -> ZeroShotLexicon:
    """Read `term<TAB>weight<TAB>polarity(+|-)` lines."""
    pos: dict[str, float] = {}
    neg: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3 or parts[2] not in ("+", "-"):
                raise DataError(f"{path}:{lineno}: expected term<TAB>weight<TAB>+|-")
            term, weight, polarity = parts
            (pos if polarity == "+" else neg)[term] = float(weight)
    return ZeroShotLexicon(pos, neg, temperature)


def save_lexicon(lexicon: ZeroShotLexicon, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for term, w in lexicon.positive_terms.items():
            fh.write(f"{term}\t{w}\t+\n")
        for term, w in lexicon.negative_terms.items():
            fh.write(f"{term}\t{w}\t-\n")


# ---------------------------------------------------------------------------
# Prompt template
# ---------------------------------------------------------------------------

COMMODITY_SLOT = "{commodity}"
CATEGORY_SLOT = "{category}"


@dataclass(frozen=True)
class PromptTemplate:
    s1_template: str = "Commodity with name {commodity}"
    s2_template: str = "is belong to {category} category."
    category: str = "coffee"

    def __post_init__(self):
        if self.s1_template.count(COMMODITY_SLOT) != 1:
            raise DataError("s1_template must contain {commodity} exactly once")
        if self.s2_template.count(CATEGORY_SLOT) != 1:
            raise DataError("s2_template must contain {category} exactly once")


def render_prompt(template: PromptTemplate, point: DataPoint | str) -> tuple[str, str]:
    """Single-pass placeholder substitution (no recursive expansion)."""
    text = point.text if isinstance(point, DataPoint) else point
    s1 = template.s1_template.replace(COMMODITY_SLOT, text, 1)
    s2 = template.s2_template.replace(CATEGORY_SLOT, template.category, 1)
    return s1, s2


# ---------------------------------------------------------------------------
# Scorer contract
# ---------------------------------------------------------------------------


class Scorer(Protocol):
    def score(self, point: DataPoint) -> float: ...


class LexiconScorer:
    """Zero-shot scorer backed by a term lexicon."""

    def __init__(self, lexicon: ZeroShotLexicon):
        self.lexicon = lexicon

    def score(self, point: DataPoint) -> float:
        return zero_shot_score(self.lexicon, point)


class ModelScorer:
    """Scorer view over trained classifier params."""

    def __init__(self, params: ClassifierParams):
        self.params = params

    def score(self, point: DataPoint) -> float:
        return predict_proba(self.params, point)


class RemoteScorer:
    """Scorer backed by a remote endpoint.

    Wire contract: POST {request_id, s1, s2, category} to the endpoint;
    the response must be a JSON object with `p_positive` in [0,1].
    """

    def __init__(
        self,
        endpoint: str,
        template: PromptTemplate,
        timeout: float = 10.0,
        max_retries: int = 3,
        backoff: float = 0.25,
    ):
        self.endpoint = endpoint
        self.template = template
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self._counter = 0

    def score(self, point: DataPoint) -> float:
        import time as _time

        import httpx

        s1, s2 = render_prompt(self.template, point)
        self._counter += 1
        payload = {
            "request_id": f"score-{self._counter}-{point.id}",
            "s1": s1,
            "s2": s2,
            "category": self.template.category,
        }
        last_exc: Exception | None = None
        for attempt in range(self.max_retries + 1):
            try:
                resp = httpx.post(self.endpoint, json=payload, timeout=self.timeout)
                resp.raise_for_status()
                body = resp.json()
                p = float(body["p_positive"])
                if not (0.0 <= p <= 1.0):
                    raise KeyError("p_positive out of range")
                return p
            except (KeyError, TypeError, ValueError) as exc:
                raise OracleProtocolError(
                    f"remote scorer returned an unusable response: {exc}",
                    payload=getattr(resp, "text", None),
                ) from exc
            except Exception as exc:  # transport-level
                last_exc = exc
                if attempt < self.max_retries:
                    _time.sleep(self.backoff * 2**attempt)
        raise OracleTransportError(
            f"remote scorer unreachable after {self.max_retries} retries: {last_exc}"
        )
