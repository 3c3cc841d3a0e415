"""Linear classifiers over hashed word n-grams for reasoning-text recall.

A recall model is a logistic regression on hashed unigram+bigram buckets —
the linear flavor of a fasttext-style classifier, which is all a binary
keep/drop decision needs. Training is plain shuffled SGD, single-threaded on
purpose: runs with the same seed reproduce the weight vector bit for bit.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Document
from .errors import DegenerateTrainingSetError
from .hashing import DEFAULT_HASH_SEED, TokenHasher, mix64, rolling_ngram_hashes

_MODEL_MAGIC = b"CKRC"
_MODEL_VERSION = 1


@dataclass(frozen=True)
class FeaturizerConfig:
    bucket_bits: int = 21
    ngram_orders: tuple[int, ...] = (1, 2)
    hash_seed: int = DEFAULT_HASH_SEED

    def __post_init__(self):
        if not 10 <= self.bucket_bits <= 26:
            raise ValueError(f"bucket_bits must be in [10, 26], got {self.bucket_bits}")

    @property
    def bucket_count(self) -> int:
        return 1 << self.bucket_bits


@dataclass
class FeatureVector:
    bucket_indices: np.ndarray  # int64, may repeat; order follows the text
    bucket_count: int


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.1
    epochs: int = 5
    seed: int = 0


@dataclass
class ClassifierModel:
    weights: np.ndarray  # float64, length bucket_count
    bias: float
    config: FeaturizerConfig
    train_config: TrainConfig
    domain: str = "general"

    def __post_init__(self):
        if len(self.weights) != self.config.bucket_count:
            raise ValueError("weight vector length does not match bucket count")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("non-finite weights")


# Built-in domain presets. The featurization is identical; what differs per
# domain is the seed corpora callers feed to train_classifier.
DOMAIN_PRESETS: dict[str, FeaturizerConfig] = {
    "math": FeaturizerConfig(),
    "code-text": FeaturizerConfig(),
    "general-reasoning": FeaturizerConfig(),
}

DEFAULT_NEGATIVE_RATIO = 1.0  # negatives sampled 1:1 against positives by default


def featurize(
    text: str, config: FeaturizerConfig = FeaturizerConfig(), hasher: TokenHasher | None = None
) -> FeatureVector:
    """Hash lowercased word n-grams into 2**bucket_bits buckets.

    Deterministic across runs and platforms for a fixed (text, config).
    Passing a shared TokenHasher lets corpus-scale callers reuse its cache.
    """
    tokens = text.lower().split()
    if hasher is None:
        hasher = TokenHasher(config.hash_seed)
    elif hasher.seed != config.hash_seed:
        raise ValueError("hasher seed does not match featurizer config")
    mask = np.uint64(config.bucket_count - 1)
    if not tokens:
        return FeatureVector(np.empty(0, dtype=np.int64), config.bucket_count)
    token_hashes = hasher.hash_tokens(tokens)
    parts = []
    for order in config.ngram_orders:
        if order == 1:
            parts.append(mix64(token_hashes) & mask)
        else:
            parts.append(rolling_ngram_hashes(token_hashes, order) & mask)
    indices = np.concatenate(parts).astype(np.int64)
    return FeatureVector(indices, config.bucket_count)


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def _doc_text(doc) -> str:
    return doc.text if isinstance(doc, Document) else str(doc)


def train_classifier(
    positives: Sequence[Document] | Sequence[str],
    negatives: Sequence[Document] | Sequence[str],
    config: FeaturizerConfig = FeaturizerConfig(),
    hyper: TrainConfig = TrainConfig(),
    domain: str = "general",
) -> ClassifierModel:
    """Fit a logistic model by shuffled SGD on binary cross-entropy.

    The shuffle order is driven solely by hyper.seed, and updates run
    single-threaded, so two runs with equal inputs produce bit-identical
    weights. Raises DegenerateTrainingSetError if either class is empty.
    """
    positives = list(positives)
    negatives = list(negatives)
    if not positives or not negatives:
        raise DegenerateTrainingSetError(
            "degenerate training set: both classes must be non-empty"
        )
    hasher = TokenHasher(config.hash_seed)
    features = [featurize(_doc_text(d), config, hasher).bucket_indices for d in positives]
    features += [featurize(_doc_text(d), config, hasher).bucket_indices for d in negatives]
    labels = np.array([1.0] * len(positives) + [0.0] * len(negatives))

    weights = np.zeros(config.bucket_count, dtype=np.float64)
    bias = 0.0
    rng = np.random.default_rng(hyper.seed)

    def epoch_loss() -> float:
        total = 0.0
        for idx, y in zip(features, labels):
            p = _sigmoid(bias + (weights[idx].mean() if len(idx) else 0.0))
            p = min(max(p, 1e-12), 1 - 1e-12)
            total += -(y * math.log(p) + (1 - y) * math.log(1 - p))
        return total / len(labels)

    initial_loss = epoch_loss()
    for _ in range(hyper.epochs):
        order = rng.permutation(len(labels))
        for i in order:
            idx = features[i]
            z = bias + (weights[idx].mean() if len(idx) else 0.0)
            g = _sigmoid(z) - labels[i]
            if len(idx):
                np.add.at(weights, idx, -hyper.lr * g / len(idx))
            bias -= hyper.lr * g
    final_loss = epoch_loss()
    if final_loss > initial_loss:
        # SGD at these defaults should never diverge on real corpora; if it
        # does, the caller's lr is wrong and silent acceptance would hide it.
        raise ValueError(
            f"training diverged: loss {initial_loss:.4f} -> {final_loss:.4f}; lower lr"
        )
    return ClassifierModel(
        weights=weights, bias=bias, config=config, train_config=hyper, domain=domain
    )


def score(model: ClassifierModel, doc: Document | str, hasher: TokenHasher | None = None) -> float:
    """P(positive) = sigmoid(mean bucket weight + bias). Pure function."""
    fv = featurize(_doc_text(doc), model.config, hasher)
    z = model.bias
    if len(fv.bucket_indices):
        z += float(model.weights[fv.bucket_indices].mean())
    return _sigmoid(z)


@dataclass
class RecallReport:
    threshold: float
    scored: int
    kept: int
    histogram: list[int] = field(default_factory=list)  # 20 bins over [0, 1]

    @property
    def keep_rate(self) -> float:
        return self.kept / self.scored if self.scored else 0.0


def recall(
    model: ClassifierModel,
    corpus: Iterable[Document],
    threshold: float = 0.5,
) -> tuple[list[Document], RecallReport]:
    """Keep documents scoring at or above the threshold."""
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    hasher = TokenHasher(model.config.hash_seed)
    kept: list[Document] = []
    hist = [0] * 20
    scored = 0
    for doc in corpus:
        s = score(model, doc, hasher)
        scored += 1
        hist[min(int(s * 20), 19)] += 1
        if s >= threshold:
            kept.append(doc)
    return kept, RecallReport(threshold=threshold, scored=scored, kept=len(kept), histogram=hist)


def save_model(model: ClassifierModel, path: str | Path) -> None:
    """Versioned binary header + little-endian float64 weight array.

    Header fields are fixed-width little-endian so the config round-trips
    bit-exactly on any platform.
    """
    domain = model.domain.encode("utf-8")
    orders = model.config.ngram_orders
    header = struct.pack(
        f"<4sIIQddIqH{len(orders)}BH",
        _MODEL_MAGIC,
        _MODEL_VERSION,
        model.config.bucket_bits,
        model.config.hash_seed,
        model.bias,
        model.train_config.lr,
        model.train_config.epochs,
        model.train_config.seed,
        len(orders),
        *orders,
        len(domain),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(domain)
        fh.write(model.weights.astype("<f8").tobytes())


def load_model(path: str | Path) -> ClassifierModel:
    with open(path, "rb") as fh:
        magic, version = struct.unpack("<4sI", fh.read(8))
        if magic != _MODEL_MAGIC:
            raise ValueError(f"{path}: not a recall model file")
        if version != _MODEL_VERSION:
            raise ValueError(f"{path}: unsupported model version {version}")
        bucket_bits, hash_seed, bias, lr, epochs, seed, n_orders = struct.unpack(
            "<IQddIqH", fh.read(42)
        )
        orders = struct.unpack(f"<{n_orders}B", fh.read(n_orders))
        (domain_len,) = struct.unpack("<H", fh.read(2))
        domain = fh.read(domain_len).decode("utf-8")
        config = FeaturizerConfig(
            bucket_bits=bucket_bits, ngram_orders=tuple(orders), hash_seed=hash_seed
        )
        weights = np.frombuffer(
            fh.read(config.bucket_count * 8), dtype="<f8"
        ).astype(np.float64)
    return ClassifierModel(
        weights=weights,
        bias=bias,
        config=config,
        train_config=TrainConfig(lr=lr, epochs=epochs, seed=seed),
        domain=domain,
    )
