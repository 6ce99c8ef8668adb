"""Per-token importance scores that steer which positions get edited.

Three built-in providers: ``attention`` reads the classifier's own attention
weights (model-specific, free), ``agnostic`` measures the probability drop
when a token is occluded (works on any classifier), and ``random`` is the
baseline. A slower sampled-permutation Shapley provider is available for
closer game-theoretic semantics, and precomputed score vectors can be
injected from JSONL so an external attribution run can drive the search.
"""

from __future__ import annotations

import itertools
import json
import math
import zlib
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, InputError
from .gateways import ClassifierGateway
from .tokenizer import DEFAULT_MASK_TOKEN, TokenSequence


@dataclass(frozen=True)
class ImportanceVector:
    """Scores aligned one-to-one with the token positions they were computed for."""

    scores: np.ndarray
    provider_id: str

    def __post_init__(self):
        if not np.all(np.isfinite(self.scores)):
            raise InputError("importance scores must be finite")

    def __len__(self) -> int:
        return len(self.scores)


class ImportanceProvider(ABC):
    """Computes an ImportanceVector for a text under a classifier.

    Implementations must be deterministic given the seed; providers that do
    not sample simply ignore it.
    """

    provider_id: str = ""

    @abstractmethod
    def compute(self, tokens: TokenSequence, classifier: ClassifierGateway,
                target: int, seed: int = 0) -> ImportanceVector:
        ...


class AttentionImportance(ImportanceProvider):
    """Attention weights from the classifier, renormalized to sum to 1.

    Attention reads the encoder, not the classification head, so the scores
    are invariant to the target class.
    """

    provider_id = "attention"

    def compute(self, tokens, classifier, target, seed=0):
        if not classifier.capabilities.exposes_attention:
            raise CapabilityError("classifier does not expose attention weights")
        weights = np.asarray(classifier.attention(tokens), dtype=float)
        if weights.shape != (len(tokens),):
            raise InputError(f"attention length {weights.shape} does not match "
                             f"{len(tokens)} tokens")
        total = weights.sum()
        scores = weights / total if total > 0 else np.full(len(tokens), 1.0 / len(tokens))
        return ImportanceVector(scores, self.provider_id)


class OcclusionImportance(ImportanceProvider):
    """score_i = p(predicted | x) - p(predicted | x with token i masked).

    Masking substitutes the mask sentinel rather than deleting, which keeps
    the sequence length and every other position stable.
    """

    provider_id = "agnostic"

    def __init__(self, mask_token: str = DEFAULT_MASK_TOKEN):
        self.mask_token = mask_token

    def compute(self, tokens, classifier, target, seed=0):
        base = classifier.predict_proba(tokens.text)
        predicted = int(np.argmax(base))
        masked_texts = [tokens.substitute(i, self.mask_token).text
                        for i in range(len(tokens))]
        masked_probs = classifier.predict_proba_batch(masked_texts)
        scores = base[predicted] - masked_probs[:, predicted]
        return ImportanceVector(np.asarray(scores, dtype=float), self.provider_id)


class SampledShapleyImportance(ImportanceProvider):
    """Monte Carlo permutation estimate of Shapley values.

    The value of a token subset is the predicted-class probability of the
    text with every other position masked; a token's score is its mean
    marginal contribution over sampled unmasking orders. When the budget
    covers all n! orders the enumeration is exhaustive and the estimate is
    exact.
    """

    provider_id = "shapley"

    def __init__(self, num_permutations: int = 100,
                 mask_token: str = DEFAULT_MASK_TOKEN):
        if num_permutations < 1:
            raise InputError("num_permutations must be >= 1")
        self.num_permutations = num_permutations
        self.mask_token = mask_token

    def compute(self, tokens, classifier, target, seed=0):
        n = len(tokens)
        base = classifier.predict_proba(tokens.text)
        predicted = int(np.argmax(base))
        value_cache: dict[frozenset[int], float] = {}

        def value(unmasked: frozenset[int]) -> float:
            cached = value_cache.get(unmasked)
            if cached is None:
                seq = tokens
                for i in range(n):
                    if i not in unmasked:
                        seq = seq.substitute(i, self.mask_token)
                cached = float(classifier.predict_proba(seq.text)[predicted])
                value_cache[unmasked] = cached
            return cached

        if self.num_permutations >= math.factorial(n):
            orders = itertools.permutations(range(n))
            n_orders = math.factorial(n)
        else:
            rng = np.random.default_rng(seed)
            orders = (tuple(rng.permutation(n)) for _ in range(self.num_permutations))
            n_orders = self.num_permutations

        totals = np.zeros(n)
        for order in orders:
            unmasked: frozenset[int] = frozenset()
            previous = value(unmasked)
            for position in order:
                unmasked = unmasked | {position}
                current = value(unmasked)
                totals[position] += current - previous
                previous = current
        return ImportanceVector(totals / n_orders, self.provider_id)


class RandomImportance(ImportanceProvider):
    """Seeded uniform-random scores, the targeting baseline.

    The seed is mixed with a checksum of the text so the same run assigns
    different (but reproducible) orderings to different tree nodes.
    """

    provider_id = "random"

    def compute(self, tokens, classifier, target, seed=0):
        rng = np.random.default_rng([seed, zlib.crc32(tokens.text.encode("utf-8"))])
        return ImportanceVector(rng.random(len(tokens)), self.provider_id)


class PrecomputedImportance(ImportanceProvider):
    """Externally computed attribution vectors, keyed by exact text.

    Lets a true SHAP (or any other) attribution run drive the search without
    the engine depending on its implementation.
    """

    provider_id = "precomputed"

    def __init__(self, table: dict[str, list[float]]):
        self._table = {text: np.asarray(scores, dtype=float)
                       for text, scores in table.items()}

    @classmethod
    def from_jsonl(cls, path) -> "PrecomputedImportance":
        """Load {"text": ..., "scores": [...]} records from a JSONL file."""
        table: dict[str, list[float]] = {}
        with open(path, encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                record = json.loads(line)
                if "text" not in record or "scores" not in record:
                    raise InputError(f"{path}:{line_no}: record needs 'text' and 'scores'")
                table[record["text"]] = record["scores"]
        return cls(table)

    def compute(self, tokens, classifier, target, seed=0):
        scores = self._table.get(tokens.text)
        if scores is None:
            raise InputError(f"no precomputed scores for text {tokens.text!r}")
        if len(scores) != len(tokens):
            raise InputError(f"precomputed scores have length {len(scores)} but the "
                             f"text has {len(tokens)} tokens")
        return ImportanceVector(scores, self.provider_id)


def make_provider(provider_id: str, mask_token: str = DEFAULT_MASK_TOKEN,
                  num_permutations: int = 100) -> ImportanceProvider:
    """Instantiate a provider from its config identifier."""
    if provider_id == "attention":
        return AttentionImportance()
    if provider_id == "agnostic":
        return OcclusionImportance(mask_token)
    if provider_id == "random":
        return RandomImportance()
    if provider_id == "shapley":
        return SampledShapleyImportance(mask_token=mask_token,
                                        num_permutations=num_permutations)
    raise InputError(f"unknown importance provider {provider_id!r}")


def compute_importance(tokens: TokenSequence, classifier: ClassifierGateway,
                       target: int, seed: int = 0,
                       provider: ImportanceProvider | None = None) -> ImportanceVector:
    """Convenience wrapper: occlusion attribution unless a provider is given."""
    provider = provider or OcclusionImportance()
    return provider.compute(tokens, classifier, target, seed)


def occlusion_importance(tokens: TokenSequence, classifier: ClassifierGateway,
                         target: int, mask_token: str = DEFAULT_MASK_TOKEN) -> ImportanceVector:
    return OcclusionImportance(mask_token).compute(tokens, classifier, target)


def sampled_shapley(tokens: TokenSequence, classifier: ClassifierGateway,
                    target: int, num_permutations: int, seed: int = 0,
                    mask_token: str = DEFAULT_MASK_TOKEN) -> ImportanceVector:
    provider = SampledShapleyImportance(num_permutations, mask_token)
    return provider.compute(tokens, classifier, target, seed)
