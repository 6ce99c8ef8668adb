"""Model suites: the bundle of gateways one run needs, built from config.

The demo suite is fully deterministic and self-contained: a lexicon-based
sentiment classifier over two classes (0 negative, 1 positive), a generic
unigram mask filler, a corpus-adapted variant of it, a hashed bag-of-words
embedder, and a bigram fluency scorer. It exists so the whole engine runs
and is testable with no neural dependency; real models attach through the
wire adapter instead.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .errors import InputError
from .gateways import (ClassifierGateway, EmbedderGateway,
                       FluencyScorerGateway, HashedBagEmbedder,
                       MaskFillerGateway, NgramFluencyScorer,
                       ReferenceLinearClassifier, ReferenceUnigramFiller)
from .objective import SearchConfig
from .semantics import (CLASSIFIER_CLS_EMBEDDING, SENTENCE_EMBEDDER,
                        SimilaritySource)
from .tokenizer import tokenize

WIRE_ENDPOINT_ENV = "TEXTCF_WIRE_ENDPOINT"

# Sentiment lexicon: weight vector [negative, positive] per token. Additive
# logits, so one strong word can flip a short sentence on its own.
_LEXICON = {
    "love": (-2.2, 2.2), "loved": (-2.0, 2.0), "great": (-1.8, 1.8),
    "wonderful": (-1.8, 1.8), "excellent": (-2.0, 2.0), "amazing": (-1.9, 1.9),
    "fantastic": (-1.8, 1.8), "brilliant": (-1.7, 1.7), "delightful": (-1.6, 1.6),
    "enjoyable": (-1.4, 1.4), "enjoyed": (-1.4, 1.4), "good": (-1.2, 1.2),
    "fine": (-0.4, 0.4), "like": (-0.8, 0.8), "liked": (-0.8, 0.8),
    "hate": (2.2, -2.2), "hated": (2.0, -2.0), "terrible": (2.0, -2.0),
    "awful": (1.8, -1.8), "horrible": (1.9, -1.9), "dreadful": (1.8, -1.8),
    "boring": (1.5, -1.5), "bad": (1.4, -1.4), "disappointing": (1.3, -1.3),
    "dull": (1.2, -1.2), "poor": (0.9, -0.9), "mediocre": (0.8, -0.8),
    "dislike": (1.0, -1.0), "worst": (2.1, -2.1), "best": (-2.1, 2.1),
}

# Rough unigram frequencies for the generic filler. Only the relative order
# matters; the filler renormalizes.
_GENERIC_FREQUENCIES = {
    "the": 600, "i": 500, "it": 400, "a": 380, "this": 300, "is": 290,
    "was": 280, "and": 260, "of": 240, "to": 230, "really": 150,
    "very": 140, "like": 120, "good": 110, "movie": 100, "film": 90,
    "great": 80, "bad": 75, "love": 70, "watch": 65, "story": 60,
    "saw": 55, "time": 50, "acting": 45, "plot": 40, "best": 38,
    "loved": 35, "enjoyed": 32, "boring": 30, "fine": 28, "poor": 26,
    "worst": 24, "liked": 22, "terrible": 20, "awful": 18, "amazing": 17,
    "wonderful": 16, "excellent": 15, "hate": 14, "horrible": 12,
    "fantastic": 11, "dull": 10, "brilliant": 9, "hated": 8,
    "disappointing": 7, "enjoyable": 6, "dislike": 5, "mediocre": 4,
    "dreadful": 3, "delightful": 2,
}

_DEMO_SENTENCES = (
    "i love this movie",
    "i hate this movie",
    "the film was really good",
    "the film was really bad",
    "this is the best movie",
    "this is the worst movie",
    "i enjoyed the story",
    "the acting was terrible",
    "a wonderful film",
    "a boring plot",
)


@dataclass
class ModelSuite:
    """Every gateway a run needs, under one roof."""

    classifier: ClassifierGateway
    filler_pretrained: MaskFillerGateway
    filler_finetuned: MaskFillerGateway
    embedder: EmbedderGateway
    fluency: FluencyScorerGateway

    def filler_for(self, config: SearchConfig) -> MaskFillerGateway:
        return (self.filler_finetuned if config.filler == "finetuned"
                else self.filler_pretrained)

    def similarity_source_for(self, config: SearchConfig) -> SimilaritySource:
        if config.similarity_source == CLASSIFIER_CLS_EMBEDDING:
            return SimilaritySource.from_classifier(self.classifier)
        return SimilaritySource.from_embedder(self.embedder)


def _finetuned_frequencies(corpus_texts: list[str]) -> dict[str, float]:
    # Blend corpus counts with the generic table so corpus-specific words
    # rise in rank without losing the fallback vocabulary.
    counts: dict[str, int] = {}
    total = 0
    for text in corpus_texts:
        for token in tokenize(text).tokens:
            lowered = token.lower()
            if not lowered.isalnum():
                continue
            counts[lowered] = counts.get(lowered, 0) + 1
            total += 1
    generic_total = float(sum(_GENERIC_FREQUENCIES.values()))
    merged = {t: 0.5 * w / generic_total for t, w in _GENERIC_FREQUENCIES.items()}
    if total:
        for token, count in counts.items():
            merged[token] = merged.get(token, 0.0) + 0.5 * count / total
    return merged


def build_demo_suite(corpus_texts: list[str] | None = None) -> ModelSuite:
    """The self-contained reference suite; see the module docstring."""
    texts = list(corpus_texts or ())
    return ModelSuite(
        classifier=ReferenceLinearClassifier(_LEXICON),
        filler_pretrained=ReferenceUnigramFiller(dict(_GENERIC_FREQUENCIES)),
        filler_finetuned=ReferenceUnigramFiller(_finetuned_frequencies(texts))
        if texts else ReferenceUnigramFiller(dict(_GENERIC_FREQUENCIES)),
        embedder=HashedBagEmbedder(64),
        fluency=NgramFluencyScorer(corpus=texts or list(_DEMO_SENTENCES)),
    )


def build_suite(models_config: dict | None = None,
                corpus_texts: list[str] | None = None) -> ModelSuite:
    """Build the suite a config asks for.

    ``models_config`` keys: "backend" ("reference" or "wire") and, for
    wire, "endpoint". The environment variable named by ``WIRE_ENDPOINT_ENV``
    overrides the configured endpoint; when it is set and the config names
    no backend, the wire backend is implied.
    """
    config = dict(models_config or {})
    endpoint_env = os.environ.get(WIRE_ENDPOINT_ENV)
    backend = config.pop("backend", "wire" if endpoint_env else "reference")
    endpoint = endpoint_env or config.pop("endpoint", None)
    config.pop("endpoint", None)
    if config:
        raise InputError(f"unknown models keys: {sorted(config)}")
    if backend == "reference":
        return build_demo_suite(corpus_texts)
    if backend == "wire":
        if not endpoint:
            raise InputError("wire backend needs an endpoint (config or "
                             f"{WIRE_ENDPOINT_ENV})")
        from .wire import wire_suite
        return wire_suite(endpoint)
    raise InputError(f"unknown backend {backend!r}; use 'reference' or 'wire'")
