"""Semantic similarity and distance between two texts.

Similarity is the cosine of two embedding vectors; distance rescales it to
[0, 1] via d = (1 - s) / 2. The embedding source is selectable: a sentence
embedder gateway (task-independent, the default) or the classifier's own
CLS embedding (task-coupled).
"""

from __future__ import annotations

import threading

import numpy as np

from .errors import CapabilityError, DegenerateEmbeddingError, InputError
from .gateways import ClassifierGateway, EmbedderGateway

SENTENCE_EMBEDDER = "sentence_embedder"
CLASSIFIER_CLS_EMBEDDING = "classifier_cls_embedding"
SOURCE_KINDS = (SENTENCE_EMBEDDER, CLASSIFIER_CLS_EMBEDDING)


class SimilaritySource:
    """An embedding source plus a per-text cache.

    The search queue re-touches the same texts repeatedly, so embeddings are
    cached by exact string. The cache is guarded by a lock; reads under
    concurrent search workers are safe.
    """

    def __init__(self, kind: str, embedder: EmbedderGateway | None = None,
                 classifier: ClassifierGateway | None = None):
        if kind not in SOURCE_KINDS:
            raise InputError(f"unknown similarity source {kind!r}")
        if kind == SENTENCE_EMBEDDER and embedder is None:
            raise InputError("sentence_embedder source needs an embedder gateway")
        if kind == CLASSIFIER_CLS_EMBEDDING:
            if classifier is None:
                raise InputError("classifier_cls_embedding source needs a classifier")
            if not classifier.capabilities.exposes_cls_embedding:
                raise CapabilityError("classifier does not expose a CLS embedding")
        self.kind = kind
        self._embedder = embedder
        self._classifier = classifier
        self._cache: dict[str, np.ndarray] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_embedder(cls, embedder: EmbedderGateway) -> "SimilaritySource":
        return cls(SENTENCE_EMBEDDER, embedder=embedder)

    @classmethod
    def from_classifier(cls, classifier: ClassifierGateway) -> "SimilaritySource":
        return cls(CLASSIFIER_CLS_EMBEDDING, classifier=classifier)

    def embed(self, text: str) -> np.ndarray:
        with self._lock:
            cached = self._cache.get(text)
        if cached is not None:
            return cached
        if self.kind == SENTENCE_EMBEDDER:
            vector = self._embedder.embed(text)
        else:
            vector = self._classifier.cls_embedding(text)
        with self._lock:
            self._cache[text] = vector
        return vector


def similarity(x: str, x_prime: str, source: SimilaritySource) -> float:
    """Cosine similarity of the two texts' embeddings, in [-1, 1].

    Raises:
        DegenerateEmbeddingError: if either embedding has zero norm. A silent
            default here would corrupt the cost ordering downstream.
    """
    a = source.embed(x)
    b = source.embed(x_prime)
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise DegenerateEmbeddingError("zero-norm embedding; cosine undefined")
    value = float(np.dot(a, b) / (norm_a * norm_b))
    return min(1.0, max(-1.0, value))


def distance(x: str, x_prime: str, source: SimilaritySource) -> float:
    """Semantic distance d = (1 - s) / 2, in [0, 1]."""
    return 0.5 * (1.0 - similarity(x, x_prime, source))
