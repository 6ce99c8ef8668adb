"""Abstract boundaries to every learned model the engine touches.

Four gateway interfaces (classifier, mask filler, sentence embedder,
fluency scorer) plus deterministic reference implementations that make the
whole engine runnable and testable without any neural dependency. Real
backends plug in through :mod:`textcf.wire` behind the same interfaces.

All gateways must be deterministic: the same input yields the same output,
bit for bit. Implementations are safe for concurrent read-only use; anything
with a mutable cache serializes internally.
"""

from __future__ import annotations

import math
import zlib
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, InputError
from .tokenizer import DEFAULT_MASK_TOKEN, TokenSequence, tokenize


@dataclass(frozen=True)
class GatewayCapabilities:
    """Optional features a classifier backend may expose."""

    exposes_attention: bool = False
    exposes_cls_embedding: bool = False


class ClassifierGateway(ABC):
    """A k-class text classifier.

    Contract:
        - ``predict_proba`` returns a length-k vector of floats in [0, 1]
          summing to 1 within 1e-6.
        - deterministic: identical text yields an identical vector.
    """

    @property
    @abstractmethod
    def num_classes(self) -> int:
        ...

    @property
    def capabilities(self) -> GatewayCapabilities:
        return GatewayCapabilities()

    @abstractmethod
    def predict_proba(self, text: str) -> np.ndarray:
        """Class probability vector for ``text``.

        Raises:
            InputError: if the text is empty after tokenization.
            GatewayError: if the backend is unreachable or misbehaves.
        """

    def predict_proba_batch(self, texts: list[str]) -> np.ndarray:
        """Probabilities for many texts at once, shape (len(texts), k).

        The default loops over ``predict_proba``; backends that can batch
        should override (one call carrying many texts is encouraged).
        """
        return np.stack([self.predict_proba(t) for t in texts])

    def attention(self, tokens: TokenSequence) -> np.ndarray:
        """Per-token attention weights, nonnegative and summing to 1.

        Only available when ``capabilities.exposes_attention`` is set. The
        weights are read from the encoder side and must not depend on any
        particular output class.
        """
        raise CapabilityError(f"{type(self).__name__} does not expose attention")

    def cls_embedding(self, text: str) -> np.ndarray:
        """Classification-token embedding, for the task-coupled similarity source."""
        raise CapabilityError(f"{type(self).__name__} does not expose a CLS embedding")


class MaskFillerGateway(ABC):
    """Proposes substitutes for a single masked position."""

    @property
    def mask_token(self) -> str:
        return DEFAULT_MASK_TOKEN

    @property
    @abstractmethod
    def vocabulary(self) -> tuple[str, ...]:
        """Proposal vocabulary in a fixed order (defines the tie-break index)."""

    @property
    def special_tokens(self) -> frozenset[str]:
        return frozenset({self.mask_token})

    def vocabulary_index(self, token: str) -> int:
        """Position of ``token`` in the vocabulary order; len(vocabulary) if unknown."""
        try:
            return self.vocabulary.index(token)
        except ValueError:
            return len(self.vocabulary)

    @abstractmethod
    def top_candidates(self, masked: TokenSequence, k: int) -> list[tuple[str, float]]:
        """Up to ``k`` (token, score) pairs for the masked position.

        Scores are nonincreasing; equal scores are ordered by ascending
        vocabulary index. Proposals never include the mask sentinel or any
        special token.

        Raises:
            InputError: unless exactly one mask sentinel is present and k >= 1.
        """


class EmbedderGateway(ABC):
    """Maps a text to a fixed-length real vector."""

    @property
    @abstractmethod
    def dimension(self) -> int:
        ...

    @abstractmethod
    def embed(self, text: str) -> np.ndarray:
        """Deterministic embedding of ``text``; length equals ``dimension``.

        Raises:
            InputError: for empty text.
        """


class FluencyScorerGateway(ABC):
    """Scores how plausible a text is as language."""

    @abstractmethod
    def perplexity(self, text: str) -> float:
        """Strictly positive, finite perplexity; deterministic.

        Raises:
            InputError: for empty text.
        """


class ReferenceLinearClassifier(ClassifierGateway):
    """Bag-of-tokens linear classifier: softmax of summed token weights + bias.

    Token lookups are case-insensitive (weights are keyed by lowercased
    token). Because the model is additive, replacing token t with t' changes
    the class-c logit by exactly ``weight(t', c) - weight(t, c)``, which the
    attribution tests use as an exact oracle.

    Attention is derived from the per-token weight spread (max class weight
    minus min class weight), renormalized to sum to 1; it does not depend on
    any target class. The CLS embedding is the raw logit vector.
    """

    def __init__(self, weights: dict[str, list[float] | np.ndarray],
                 bias: list[float] | np.ndarray | None = None,
                 num_classes: int | None = None):
        if not weights and num_classes is None and bias is None:
            raise InputError("cannot infer the class count from empty weights")
        if num_classes is None:
            if bias is not None:
                num_classes = len(np.asarray(bias, dtype=float))
            else:
                num_classes = len(np.asarray(next(iter(weights.values())), dtype=float))
        self._k = int(num_classes)
        if self._k < 2:
            raise InputError("classifier needs at least 2 classes")
        self._weights = {t.lower(): np.asarray(w, dtype=float) for t, w in weights.items()}
        for t, w in self._weights.items():
            if w.shape != (self._k,):
                raise InputError(f"weight vector for {t!r} must have length {self._k}")
        self._bias = (np.zeros(self._k) if bias is None
                      else np.asarray(bias, dtype=float))
        if self._bias.shape != (self._k,):
            raise InputError(f"bias must have length {self._k}")

    @property
    def num_classes(self) -> int:
        return self._k

    @property
    def capabilities(self) -> GatewayCapabilities:
        return GatewayCapabilities(exposes_attention=True, exposes_cls_embedding=True)

    def token_weight(self, token: str) -> np.ndarray:
        """Weight vector for one token (zeros if out of lexicon)."""
        return self._weights.get(token.lower(), np.zeros(self._k))

    def logits(self, text: str) -> np.ndarray:
        sequence = tokenize(text)
        total = self._bias.copy()
        for token in sequence.tokens:
            total += self.token_weight(token)
        return total

    def predict_proba(self, text: str) -> np.ndarray:
        return softmax(self.logits(text))

    def attention(self, tokens: TokenSequence) -> np.ndarray:
        spreads = np.array([float(np.ptp(self.token_weight(t))) for t in tokens.tokens])
        total = spreads.sum()
        if total <= 0.0:
            return np.full(len(tokens), 1.0 / len(tokens))
        return spreads / total

    def cls_embedding(self, text: str) -> np.ndarray:
        return self.logits(text)


class ReferenceUnigramFiller(MaskFillerGateway):
    """Context-free filler backed by a token frequency table.

    Scores are the table weights normalized to sum to 1 over the proposal
    vocabulary, so raw counts and probabilities behave identically.
    """

    def __init__(self, frequencies: dict[str, float],
                 mask_token: str = DEFAULT_MASK_TOKEN,
                 special_tokens: frozenset[str] | set[str] = frozenset()):
        if not frequencies:
            raise InputError("frequency table is empty")
        self._mask_token = mask_token
        self._special = frozenset(special_tokens) | {mask_token}
        self._vocab = tuple(t for t in frequencies if t not in self._special)
        if not self._vocab:
            raise InputError("frequency table has no non-special tokens")
        total = float(sum(frequencies[t] for t in self._vocab))
        if total <= 0.0:
            raise InputError("frequency table weights must sum to a positive value")
        self._scores = {t: float(frequencies[t]) / total for t in self._vocab}
        self._index = {t: i for i, t in enumerate(self._vocab)}

    @property
    def mask_token(self) -> str:
        return self._mask_token

    @property
    def vocabulary(self) -> tuple[str, ...]:
        return self._vocab

    @property
    def special_tokens(self) -> frozenset[str]:
        return self._special

    def vocabulary_index(self, token: str) -> int:
        return self._index.get(token, len(self._vocab))

    def top_candidates(self, masked: TokenSequence, k: int) -> list[tuple[str, float]]:
        if k < 1:
            raise InputError("k must be >= 1")
        n_masks = sum(1 for t in masked.tokens if t == self._mask_token)
        if n_masks != 1:
            raise InputError(f"expected exactly one mask sentinel, found {n_masks}")
        ranked = sorted(self._vocab, key=lambda t: (-self._scores[t], self._index[t]))
        return [(t, self._scores[t]) for t in ranked[:k]]


class HashedBagEmbedder(EmbedderGateway):
    """Bag-of-tokens embedding into hashed buckets.

    Each token adds 1 to the bucket ``crc32(token) % dimension``, so the map
    is linear in token counts and stable across runs and platforms.
    """

    def __init__(self, dimension: int = 64):
        if dimension < 1:
            raise InputError("dimension must be positive")
        self._dim = int(dimension)

    @property
    def dimension(self) -> int:
        return self._dim

    def bucket(self, token: str) -> int:
        return zlib.crc32(token.encode("utf-8")) % self._dim

    def embed(self, text: str) -> np.ndarray:
        sequence = tokenize(text)
        vec = np.zeros(self._dim)
        for token in sequence.tokens:
            vec[self.bucket(token)] += 1.0
        return vec


class NgramFluencyScorer(FluencyScorerGateway):
    """Bigram language model with add-one smoothing.

    Fitted on a plain-text corpus; with no corpus it degrades to a uniform
    unigram model over the supplied vocabulary, whose perplexity is exactly
    the vocabulary size.
    """

    _BOS = "<s>"

    def __init__(self, corpus: list[str] | None = None,
                 vocabulary: set[str] | None = None,
                 smoothing: float = 1.0):
        if smoothing <= 0.0:
            raise InputError("smoothing must be positive")
        self._smoothing = float(smoothing)
        self._bigram: dict[tuple[str, str], int] = {}
        self._context: dict[str, int] = {}
        vocab = set(vocabulary or ())
        for line in corpus or ():
            tokens = tokenize(line).tokens
            vocab.update(tokens)
            prev = self._BOS
            for token in tokens:
                self._bigram[(prev, token)] = self._bigram.get((prev, token), 0) + 1
                self._context[prev] = self._context.get(prev, 0) + 1
                prev = token
        if not vocab:
            raise InputError("scorer needs a corpus or an explicit vocabulary")
        self._vocab_size = len(vocab)

    def perplexity(self, text: str) -> float:
        tokens = tokenize(text).tokens
        log_prob = 0.0
        prev = self._BOS
        for token in tokens:
            num = self._bigram.get((prev, token), 0) + self._smoothing
            den = self._context.get(prev, 0) + self._smoothing * self._vocab_size
            log_prob += math.log(num / den)
            prev = token
        return math.exp(-log_prob / len(tokens))


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = np.exp(logits - np.max(logits))
    return shifted / shifted.sum()
